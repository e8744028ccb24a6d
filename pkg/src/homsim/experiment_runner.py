"""Full pipeline: paired source, two apparatuses, HOM readout, sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from homsim import hom_interferometer
from homsim.errors import ParameterError, ValidationError
from homsim.fock_optics import hom_output_distribution
from homsim.hom_interferometer import (
    DetectionTally,
    classify_draws,
    outcome_distribution,
    rate_interval,
    tally_from_outcomes,
)
from homsim.measurement_chain import (
    CollapseModel,
    EmissionBranch,
    emission_branches,
    emit_photon,
    ensemble_state,
    entangle_chain,
    prepare_input,
    select_branch,
)
from homsim.quantum_core import LINEAR, DensityMatrix, PureState, Subsystem, purity, to_density
from homsim.streams import (
    SLOT_APPARATUS_1,
    SLOT_APPARATUS_2,
    SLOT_DETECTION,
    TrialStream,
    derive_seed,
    trial_uniforms,
)

Z_SCORE = 3.0


@dataclass(frozen=True)
class ScenarioConfig:
    model: CollapseModel
    eta: float = 1.0
    trials: int = 100_000
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.model, CollapseModel):
            raise ValidationError(f"model must be a CollapseModel, got {self.model!r}")
        eta = float(self.eta)
        if math.isnan(eta) or not 0.0 <= eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {self.eta}")
        object.__setattr__(self, "eta", eta)
        if isinstance(self.trials, bool) or not isinstance(self.trials, (int, np.integer)) \
                or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed!r}")


@dataclass(frozen=True)
class ScenarioResult:
    config: ScenarioConfig
    analytic_rate: float
    tally: DetectionTally
    interval: Tuple[float, float]
    emitted_purity: float

    @property
    def rate(self) -> float:
        return self.tally.coincidences / self.tally.trials


def _apparatus_branches(model: CollapseModel) -> List[EmissionBranch]:
    # Every trial feeds the same prepared photon through the chain, so the
    # branch structure is computed once and only the draws vary per trial.
    return emission_branches(entangle_chain(prepare_input()), model)


def _pair_table(branches1, branches2, eta):
    """Closed-form outcome probabilities for every pair of emission branches."""
    pc = np.empty((len(branches1), len(branches2)))
    pa = np.empty_like(pc)
    for i, b1 in enumerate(branches1):
        for j, b2 in enumerate(branches2):
            dist = outcome_distribution(b1.state, b2.state, eta)
            pc[i, j], pa[i, j] = dist.p_coincidence, dist.p_both_A
    return pc, pa


def trial_outcomes(config: ScenarioConfig) -> np.ndarray:
    """Detection outcome code of every trial (see ``hom_interferometer.OUTCOMES``)."""
    branches = _apparatus_branches(config.model)
    draws = trial_uniforms(config.seed, config.trials)
    k1 = select_branch(branches, draws[:, SLOT_APPARATUS_1])
    k2 = select_branch(branches, draws[:, SLOT_APPARATUS_2])
    pc, pa = _pair_table(branches, branches, config.eta)
    return classify_draws(draws[:, SLOT_DETECTION], pc[k1, k2], pa[k1, k2])


def run_trial(config: ScenarioConfig, index: int) -> int:
    """Single trial through the scalar API; matches ``trial_outcomes(config)[index]``."""
    tripartite = entangle_chain(prepare_input())
    stream1 = TrialStream(config.seed, index, SLOT_APPARATUS_1)
    stream2 = TrialStream(config.seed, index, SLOT_APPARATUS_2)
    photon1 = emit_photon(tripartite, config.model, stream1, index)
    photon2 = emit_photon(tripartite, config.model, stream2, index)
    dist = outcome_distribution(photon1.state, photon2.state, config.eta)
    u = TrialStream(config.seed, index, SLOT_DETECTION).random()
    return int(classify_draws(u, dist.p_coincidence, dist.p_both_A))


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run ``config.trials`` independent repetitions of the two-apparatus experiment."""
    branches = _apparatus_branches(config.model)
    average = ensemble_state(branches)
    analytic = hom_interferometer.coincidence_probability(average, average, config.eta)
    tally = tally_from_outcomes(trial_outcomes(config), config.seed)
    return ScenarioResult(
        config=config,
        analytic_rate=analytic,
        tally=tally,
        interval=rate_interval(tally, Z_SCORE, "coincidence"),
        emitted_purity=purity(average),
    )


SWEEP_PARAMS = ("gamma", "eta")


def run_sweep(base: ScenarioConfig, param: str, values: Sequence[float]) -> List[ScenarioResult]:
    """One scenario per value; point ``i`` runs with seed ``derive_seed(base.seed, i)``.

    A ``gamma`` sweep replaces the model by dephasing of that strength; an
    ``eta`` sweep keeps the model and varies the temporal overlap.
    """
    if param not in SWEEP_PARAMS:
        raise ParameterError(f"unknown sweep parameter {param!r}; expected one of {SWEEP_PARAMS}")
    configs = []
    for i, value in enumerate(values):
        value = float(value)
        if math.isnan(value) or not 0.0 <= value <= 1.0:
            raise ParameterError(f"{param} value {value} outside [0, 1]")
        seed = derive_seed(base.seed, i)
        if param == "gamma":
            configs.append(replace(base, model=CollapseModel.dephasing(value), seed=seed))
        else:
            configs.append(replace(base, eta=value, seed=seed))
    return [run_scenario(c) for c in configs]


# --- closed form vs Fock-space brute force ---------------------------------

_POL = Subsystem("pol", LINEAR)


def _random_polarization(rng: np.random.Generator) -> DensityMatrix:
    """Random pure (half the time) or full-rank mixed single-photon state."""
    if rng.random() < 0.5:
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        vec /= np.linalg.norm(vec)
        return to_density(PureState.from_vector((_POL,), vec))
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix((_POL,), m / np.trace(m).real)


def _random_eta(rng: np.random.Generator) -> float:
    r = rng.random()
    if r < 0.1:
        return 0.0
    if r < 0.2:
        return 1.0
    return float(rng.random())


def oracle_error(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    eta: float,
    closed_form: Optional[Callable[[DensityMatrix, DensityMatrix, float], float]] = None,
) -> float:
    closed_form = closed_form or hom_interferometer.coincidence_probability
    brute = hom_output_distribution(rho1, rho2, eta).p_coincidence
    return abs(closed_form(rho1, rho2, eta) - brute)


def oracle_check(
    samples: int,
    seed: int = 0,
    closed_form: Optional[Callable[[DensityMatrix, DensityMatrix, float], float]] = None,
) -> float:
    """Largest disagreement between the closed-form and Fock-space coincidence probability."""
    if samples < 1:
        raise ParameterError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        rho1, rho2 = _random_polarization(rng), _random_polarization(rng)
        eta = _random_eta(rng)
        worst = max(worst, oracle_error(rho1, rho2, eta, closed_form))
    return worst
