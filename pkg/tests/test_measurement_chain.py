import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homsim.errors import ParameterError, ValidationError
from homsim.measurement_chain import (
    ClickRecord,
    CollapseKind,
    CollapseModel,
    couple_detector,
    detector_probabilities,
    emission_branches,
    emit_photon,
    ensemble_state,
    entangle_chain,
    prepare_input,
)
from homsim.quantum_core import (
    LINEAR,
    DensityMatrix,
    PureState,
    Subsystem,
    purity,
    to_linear,
)
from homsim.streams import TrialStream

S = 1 / math.sqrt(2)
CIRC_PHOTON = Subsystem("photon", ("R", "L"))

ERASED = CollapseModel.unitary_erased()
RECORDED = CollapseModel.unitary_recorded()
COLLAPSE = CollapseModel.projective_collapse()


class FixedDraw:
    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def eq5_vector():
    """(|R,D1,H> + |L,D2,V>)/sqrt2 on a 2x2x2 space with index bits (pol, det, emit)."""
    vec = np.zeros(8, dtype=complex)
    vec[0b000] = S
    vec[0b111] = S
    return vec


@pytest.fixture
def tripartite():
    return entangle_chain(prepare_input())


def test_prepare_input():
    psi = prepare_input()
    assert psi.amplitude("R") == pytest.approx(S)
    assert psi.amplitude("L") == pytest.approx(S)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    lin = to_linear(psi, "photon")
    assert lin.amplitudes.keys() == {("H",)}


def test_entangle_chain_eq5(tripartite):
    assert tripartite.names == ("photon", "detector", "emitted")
    assert tripartite.amplitudes.keys() == {("R", "D1", "H"), ("L", "D2", "V")}
    assert tripartite.amplitude("R", "D1", "H") == pytest.approx(S)
    assert tripartite.amplitude("L", "D2", "V") == pytest.approx(S)


def test_entangle_single_branch():
    out = entangle_chain(PureState.ket(CIRC_PHOTON, "R"))
    assert out.amplitudes == {("R", "D1", "H"): 1.0}


def test_detector_coupling_eq4():
    out = couple_detector(prepare_input())
    assert out.names == ("photon", "detector")
    assert out.amplitude("R", "D1") == pytest.approx(S)
    assert out.amplitude("L", "D2") == pytest.approx(S)
    assert len(out.amplitudes) == 2


@given(st.floats(0, 2 * math.pi), st.floats(0, math.pi / 2))
def test_entangle_chain_is_linear(phase, theta):
    alpha, beta = math.cos(theta), math.sin(theta) * complex(math.cos(phase), math.sin(phase))
    psi = PureState((CIRC_PHOTON,), {("R",): alpha, ("L",): beta})
    out = entangle_chain(psi)
    assert out.amplitude("R", "D1", "H") == pytest.approx(alpha, abs=1e-15)
    assert out.amplitude("L", "D2", "V") == pytest.approx(beta, abs=1e-15)


def test_erased_emits_plus_state(tripartite):
    # oracle: map |pol,det> -> |absorbed, ready> on the 8-dim vector, then trace
    vec = eq5_vector().reshape(2, 2, 2)
    erased = vec.sum(axis=(0, 1))  # both branches land on one ancilla state
    expected = np.outer(erased, erased.conj())
    photon = emit_photon(tripartite, ERASED, rng=None)
    np.testing.assert_allclose(photon.state.matrix, expected, atol=1e-15)
    np.testing.assert_allclose(photon.state.matrix, np.full((2, 2), 0.5), atol=1e-15)
    assert photon.purity == pytest.approx(1.0, abs=1e-12)
    assert photon.click.detector is None


def test_recorded_emits_mixture(tripartite):
    vec = eq5_vector()
    expected = np.einsum("ijaijb->ab", np.outer(vec, vec.conj()).reshape([2] * 6))
    photon = emit_photon(tripartite, RECORDED, rng=None)
    np.testing.assert_allclose(photon.state.matrix, expected, atol=1e-15)
    assert photon.purity == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("u, det, expected", [
    (0.1, "D1", [[1, 0], [0, 0]]),
    (0.49, "D1", [[1, 0], [0, 0]]),
    (0.51, "D2", [[0, 0], [0, 1]]),
])
def test_projective_collapse(tripartite, u, det, expected):
    photon = emit_photon(tripartite, COLLAPSE, FixedDraw(u), trial_index=7)
    assert photon.click == ClickRecord(det, 7)
    np.testing.assert_allclose(photon.state.matrix, expected, atol=1e-15)


def test_collapse_probabilities_are_even(tripartite):
    p1, p2 = detector_probabilities(tripartite)
    assert p1 == pytest.approx(0.5, abs=1e-15)
    assert p2 == pytest.approx(0.5, abs=1e-15)


def test_born_statistics(tripartite):
    n = 20_000
    clicks = [emit_photon(tripartite, COLLAPSE, TrialStream(11, i)).click.detector
              for i in range(n)]
    frac = clicks.count("D1") / n
    assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_collapse_ensemble_equals_recorded(tripartite):
    ens = ensemble_state(emission_branches(tripartite, COLLAPSE))
    rec = emit_photon(tripartite, RECORDED, None).state
    assert ens.allclose(rec, atol=1e-12)
    n = 20_000
    mats = [emit_photon(tripartite, COLLAPSE, TrialStream(3, i)).state.matrix
            for i in range(n)]
    sampled = np.mean(mats, axis=0)
    assert np.max(np.abs(sampled - rec.matrix)) <= 3 * math.sqrt(0.25 / n)


def test_dephasing_endpoints(tripartite):
    erased = emit_photon(tripartite, ERASED, None).state
    recorded = emit_photon(tripartite, RECORDED, None).state
    assert emit_photon(tripartite, CollapseModel.dephasing(0.0), None).state == erased
    assert emit_photon(tripartite, CollapseModel.dephasing(1.0), None).state == recorded
    np.testing.assert_allclose(recorded.matrix, np.eye(2) / 2, atol=1e-15)


@given(st.floats(0, 1))
def test_dephasing_output_is_valid(gamma):
    trip = entangle_chain(prepare_input())
    photon = emit_photon(trip, CollapseModel.dephasing(gamma), None)
    assert isinstance(photon.state, DensityMatrix)
    assert photon.state.matrix[0, 1] == pytest.approx((1 - gamma) / 2, abs=1e-15)
    assert 0.5 - 1e-12 <= purity(photon.state) <= 1 + 1e-12


@pytest.mark.parametrize("bad", [
    lambda: CollapseModel.dephasing(1.5),
    lambda: CollapseModel.dephasing(-0.01),
    lambda: CollapseModel(CollapseKind.DEPHASING),
    lambda: CollapseModel(CollapseKind.UNITARY_ERASED, 0.3),
])
def test_collapse_model_validation(bad):
    with pytest.raises(ParameterError):
        bad()


def test_emit_rejects_wrong_space():
    with pytest.raises(ValidationError):
        emit_photon(prepare_input(), ERASED, None)


def test_click_record_validation():
    with pytest.raises(ValidationError):
        ClickRecord("D3")
    with pytest.raises(ValidationError):
        ClickRecord("D1", -1)


def test_linear_input_is_accepted():
    h = PureState.ket(Subsystem("photon", LINEAR), "H")
    out = entangle_chain(h)
    assert out.amplitude("R", "D1", "H") == pytest.approx(S)
    assert out.amplitude("L", "D2", "V") == pytest.approx(S)
