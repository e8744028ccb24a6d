"""Coincidence readout for two photons on a balanced beam splitter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from homsim.errors import DimensionError, ParameterError, ValidationError
from homsim.quantum_core import DensityMatrix
from homsim.streams import SLOT_DETECTION, trial_uniforms

OUTCOMES = ("coincidence", "both_A", "both_B")

COINCIDENCE, BOTH_A, BOTH_B = range(3)

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the three two-photon detection patterns."""

    p_coincidence: float
    p_both_A: float
    p_both_B: float

    def __post_init__(self):
        probs = self.as_tuple()
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise ValidationError(f"probabilities out of range: {probs}")
        if abs(sum(probs) - 1.0) > _SUM_TOL:
            raise ValidationError(f"probabilities sum to {sum(probs)!r}")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.p_coincidence, self.p_both_A, self.p_both_B)


@dataclass(frozen=True)
class DetectionTally:
    trials: int
    coincidences: int
    both_A: int
    both_B: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("a tally needs at least one trial")
        if self.coincidences + self.both_A + self.both_B != self.trials:
            raise ValidationError("tally counts do not add up to the trial count")

    def count(self, outcome: str) -> int:
        if outcome not in OUTCOMES:
            raise ParameterError(f"unknown outcome {outcome!r}; expected one of {OUTCOMES}")
        return {"coincidence": self.coincidences,
                "both_A": self.both_A,
                "both_B": self.both_B}[outcome]

    def rate(self, outcome: str = "coincidence") -> float:
        return self.count(outcome) / self.trials


def _check_polarization(rho) -> DensityMatrix:
    if not isinstance(rho, DensityMatrix):
        raise ValidationError("expected a DensityMatrix")
    if rho.dim != 2:
        raise DimensionError("expected a single-photon polarization density matrix")
    return rho


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0 or math.isnan(eta):
        raise ParameterError(f"temporal overlap must lie in [0, 1], got {eta}")
    return eta


def coincidence_probability(rho1: DensityMatrix, rho2: DensityMatrix, eta: float = 1.0) -> float:
    """Probability that the two detectors fire together: (1 - eta Tr(rho1 rho2)) / 2.

    Evaluated as ``(Tr rho1 Tr rho2 - eta Tr(rho1 rho2)) / 2``, which is equal
    for valid inputs and makes identical pure inputs cancel to exactly zero.
    """
    rho1, rho2 = _check_polarization(rho1), _check_polarization(rho2)
    eta = _check_eta(eta)
    a, b = rho1.matrix, rho2.matrix
    overlap = float(np.real(np.sum(a * b.T)))
    norms = float(np.real(np.trace(a))) * float(np.real(np.trace(b)))
    return min(max((norms - eta * overlap) / 2.0, 0.0), 0.5)


def outcome_distribution(rho1: DensityMatrix, rho2: DensityMatrix, eta: float = 1.0) -> OutcomeDistribution:
    """Closed-form distribution; bunching splits evenly between the two ports."""
    pc = coincidence_probability(rho1, rho2, eta)
    bunched = (1.0 - pc) / 2.0
    return OutcomeDistribution(pc, bunched, bunched)


def classify_draws(u: np.ndarray, p_coincidence, p_both_A) -> np.ndarray:
    """Inverse-CDF over the fixed order (coincidence, both_A, both_B)."""
    u = np.asarray(u)
    first = np.asarray(p_coincidence)
    second = first + np.asarray(p_both_A)
    return np.where(u < first, COINCIDENCE, np.where(u < second, BOTH_A, BOTH_B))


def tally_from_outcomes(outcomes: np.ndarray, seed: int) -> DetectionTally:
    counts = np.bincount(outcomes, minlength=3)
    return DetectionTally(
        trials=int(outcomes.shape[0]),
        coincidences=int(counts[COINCIDENCE]),
        both_A=int(counts[BOTH_A]),
        both_B=int(counts[BOTH_B]),
        seed=seed,
    )


def sample_detections(dist: OutcomeDistribution, trials: int, seed: int) -> DetectionTally:
    """Draw one detection pattern per trial from the detection slot of each trial stream."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    u = trial_uniforms(seed, trials)[:, SLOT_DETECTION]
    outcomes = classify_draws(u, dist.p_coincidence, dist.p_both_A)
    return tally_from_outcomes(outcomes, seed)


def wilson_interval(successes: int, trials: int, z: float) -> Tuple[float, float]:
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if z < 0:
        raise ParameterError("z must be nonnegative")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)) / denom
    low = min(max(center - half, 0.0), phat)
    high = max(min(center + half, 1.0), phat)
    return low, high


def rate_interval(tally: DetectionTally, z: float = 3.0, outcome: str = "coincidence") -> Tuple[float, float]:
    """Wilson score interval for the observed rate of ``outcome``."""
    return wilson_interval(tally.count(outcome), tally.trials, z)
