"""One measuring apparatus: polyprism, detector pair, coupled emitters.

A circularly polarized photon is split by handedness, absorbed by detector
D1 (R) or D2 (L), and the firing detector triggers an emitter producing an
H (from D1) or V (from D2) photon. What happens to the which-detector
information is set by a :class:`CollapseModel`.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from homsim.errors import ParameterError, ValidationError
from homsim.quantum_core import (
    CIRCULAR,
    LINEAR,
    DensityMatrix,
    PureState,
    Subsystem,
    dephase,
    partial_trace,
    purity,
    to_circular,
    to_density,
)

PHOTON = Subsystem("photon", CIRCULAR)
DETECTOR = Subsystem("detector", ("ready", "D1", "D2"))
EMITTED = Subsystem("emitted", LINEAR)

# handedness -> (detector that fires, polarization it emits)
COUPLING = {"R": ("D1", "H"), "L": ("D2", "V")}


class CollapseKind(enum.Enum):
    UNITARY_ERASED = "unitary_erased"
    UNITARY_RECORDED = "unitary_recorded"
    PROJECTIVE_COLLAPSE = "projective_collapse"
    DEPHASING = "dephasing"


@dataclass(frozen=True)
class CollapseModel:
    """Post-measurement channel applied inside the apparatus.

    ``gamma`` is only meaningful (and required) for ``DEPHASING``.
    """

    kind: CollapseKind
    gamma: Optional[float] = None

    def __post_init__(self):
        kind = CollapseKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is CollapseKind.DEPHASING:
            if self.gamma is None:
                raise ParameterError("dephasing model needs a strength gamma")
            gamma = float(self.gamma)
            if math.isnan(gamma) or not 0.0 <= gamma <= 1.0:
                raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
            object.__setattr__(self, "gamma", gamma)
        elif self.gamma is not None:
            raise ParameterError(f"{kind.value} takes no gamma parameter")

    @classmethod
    def unitary_erased(cls) -> "CollapseModel":
        return cls(CollapseKind.UNITARY_ERASED)

    @classmethod
    def unitary_recorded(cls) -> "CollapseModel":
        return cls(CollapseKind.UNITARY_RECORDED)

    @classmethod
    def projective_collapse(cls) -> "CollapseModel":
        return cls(CollapseKind.PROJECTIVE_COLLAPSE)

    @classmethod
    def dephasing(cls, gamma: float) -> "CollapseModel":
        return cls(CollapseKind.DEPHASING, gamma)

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class ClickRecord:
    detector: Optional[str]
    trial_index: int = 0

    def __post_init__(self):
        if self.detector not in (None, "D1", "D2"):
            raise ValidationError(f"unknown detector {self.detector!r}")
        if self.trial_index < 0:
            raise ValidationError("trial index must be nonnegative")


@dataclass(frozen=True)
class EmittedPhoton:
    state: DensityMatrix
    click: ClickRecord

    @property
    def purity(self) -> float:
        return purity(self.state)


@dataclass(frozen=True)
class EmissionBranch:
    """One possible emission outcome with its probability."""

    probability: float
    state: DensityMatrix
    detector: Optional[str]


def prepare_input() -> PureState:
    """(|R> + |L>)/sqrt2 on the input photon."""
    amp = 1.0 / math.sqrt(2.0)
    return PureState((PHOTON,), {("R",): amp, ("L",): amp})


def _circular_photon(state: PureState) -> PureState:
    if len(state.space) != 1:
        raise ValidationError("expected a single-photon polarization state")
    name = state.names[0]
    circ = to_circular(state, name)
    return PureState((PHOTON,), {(lvl,): a for (lvl,), a in circ.amplitudes.items()})


def couple_detector(state: PureState) -> PureState:
    """Photon after the polyprism, correlated with the detector that absorbs it."""
    photon = _circular_photon(state)
    amps = {(pol, COUPLING[pol][0]): a for (pol,), a in photon.amplitudes.items()}
    return PureState((PHOTON, DETECTOR), amps)


def entangle_chain(state: PureState) -> PureState:
    """Photon, detector and emitted photon after the emitters fire.

    The birefringent merge of the two emitter paths is treated as the
    identity on the emitted polarization.
    """
    coupled = couple_detector(state)
    amps = {
        (pol, det, COUPLING[pol][1]): a for (pol, det), a in coupled.amplitudes.items()
    }
    return PureState((PHOTON, DETECTOR, EMITTED), amps)


def _check_tripartite(state: PureState) -> None:
    if state.names != ("photon", "detector", "emitted"):
        raise ValidationError(
            f"expected subsystems (photon, detector, emitted), got {state.names}"
        )


def erase_records(tripartite: PureState) -> PureState:
    """Absorb the photon and coherently reset the detector to ``ready``.

    Both branches leave identical ancilla states, so only the emitted photon
    keeps the superposition.
    """
    _check_tripartite(tripartite)
    amps = defaultdict(complex)
    for (_, _, emit), a in tripartite.amplitudes.items():
        amps[("ready", emit)] += a
    return PureState((DETECTOR, EMITTED), amps)


def emission_branches(tripartite: PureState, model: CollapseModel) -> List[EmissionBranch]:
    """Every emitted-photon outcome the model can produce, in a fixed order.

    Deterministic models return a single branch with probability 1;
    projective collapse returns one branch per detector with Born weights.
    """
    _check_tripartite(tripartite)
    if not isinstance(model, CollapseModel):
        raise ParameterError(f"expected a CollapseModel, got {model!r}")
    kind = model.kind
    if kind is CollapseKind.UNITARY_ERASED:
        state = partial_trace(to_density(erase_records(tripartite)), {"emitted"})
        return [EmissionBranch(1.0, state, None)]
    if kind is CollapseKind.DEPHASING:
        erased = partial_trace(to_density(erase_records(tripartite)), {"emitted"})
        return [EmissionBranch(1.0, dephase(erased, model.gamma, "emitted"), None)]
    if kind is CollapseKind.UNITARY_RECORDED:
        state = partial_trace(to_density(tripartite), {"emitted"})
        return [EmissionBranch(1.0, state, None)]

    branches = []
    for det in ("D1", "D2"):
        vec = np.zeros(EMITTED.dim, dtype=complex)
        for (_, d, emit), a in tripartite.amplitudes.items():
            if d == det:
                vec[EMITTED.index(emit)] += a
        weight = float(np.vdot(vec, vec).real)
        if weight > 0.0:
            cond = np.outer(vec, vec.conj()) / weight
            branches.append(EmissionBranch(weight, DensityMatrix((EMITTED,), cond), det))
    return branches


def select_branch(branches: List[EmissionBranch], u) -> np.ndarray:
    """Index of the branch chosen by uniform draw(s) ``u`` (inverse CDF)."""
    cdf = np.cumsum([b.probability for b in branches])
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(branches) - 1)


def emit_photon(
    tripartite: PureState, model: CollapseModel, rng, trial_index: int = 0
) -> EmittedPhoton:
    """Emitted photon of one apparatus run.

    ``rng`` needs a ``random()`` method; it is consulted only under projective
    collapse.
    """
    branches = emission_branches(tripartite, model)
    if model.kind is CollapseKind.PROJECTIVE_COLLAPSE:
        branch = branches[int(select_branch(branches, rng.random()))]
    else:
        branch = branches[0]
    return EmittedPhoton(branch.state, ClickRecord(branch.detector, trial_index))


def ensemble_state(branches: List[EmissionBranch]) -> DensityMatrix:
    """Probability-weighted average over emission branches."""
    total = sum(b.probability * b.state.matrix for b in branches)
    return DensityMatrix(branches[0].state.space, total)


def detector_probabilities(tripartite: PureState) -> Tuple[float, float]:
    """Born probabilities of D1 and D2 firing."""
    _check_tripartite(tripartite)
    p = {"D1": 0.0, "D2": 0.0}
    for (_, det, _), a in tripartite.amplitudes.items():
        p[det] += abs(a) ** 2
    return p["D1"], p["D2"]
