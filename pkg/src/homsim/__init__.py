"""Simulator for a two-photon interference test of apparatus superposition.

Two identical measuring apparatuses each turn a circularly polarized photon
into an emitted H/V photon; the emitted pair meets on a beam splitter. The
coincidence rate is 0 when the apparatuses stayed in superposition, 1/4 when
they collapsed (or kept records), and 1/2 for temporally distinguishable
photons.
"""

from homsim.experiment_runner import (
    ScenarioConfig,
    ScenarioResult,
    oracle_check,
    run_scenario,
    run_sweep,
)
from homsim.hom_interferometer import (
    DetectionTally,
    OutcomeDistribution,
    coincidence_probability,
    rate_interval,
    sample_detections,
)
from homsim.measurement_chain import CollapseKind, CollapseModel

__all__ = [
    "CollapseKind",
    "CollapseModel",
    "DetectionTally",
    "OutcomeDistribution",
    "ScenarioConfig",
    "ScenarioResult",
    "coincidence_probability",
    "oracle_check",
    "rate_interval",
    "run_scenario",
    "run_sweep",
    "sample_detections",
]

__version__ = "0.1.0"
