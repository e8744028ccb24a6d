"""Multimode bosonic Fock states and passive linear optics.

States are expanded term by term in creation-operator algebra, so this
module doubles as the brute-force reference for every closed-form
coincidence formula elsewhere in the package.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from homsim.errors import (
    DimensionError,
    ParameterError,
    SubsystemLookupError,
    TruncationError,
    ValidationError,
)
from homsim.hom_interferometer import OutcomeDistribution
from homsim.quantum_core import (
    CIRCULAR,
    LINEAR,
    NORM_TOL,
    PRUNE_TOL,
    DensityMatrix,
    PureState,
    to_circular,
)

POLARIZATIONS = LINEAR + CIRCULAR
DEFAULT_CUTOFF = 2

Occupation = Tuple[int, ...]


@dataclass(frozen=True, order=True)
class Mode:
    """One optical mode: spatial path, polarization and a wavepacket tag."""

    path: str
    pol: str = "H"
    tag: int = 0

    def __post_init__(self):
        if self.pol not in POLARIZATIONS:
            raise ValidationError(f"unknown polarization {self.pol!r}")
        if self.tag < 0:
            raise ValidationError("mode tag must be nonnegative")


def _check_register(register: Sequence[Mode]) -> Tuple[Mode, ...]:
    register = tuple(register)
    if len(set(register)) != len(register):
        raise ValidationError("mode register contains repeated modes")
    return register


def _factorial_sqrt(occ: Occupation) -> float:
    return math.sqrt(math.prod(math.factorial(n) for n in occ))


@dataclass(frozen=True)
class FockState:
    """Normalized superposition of occupation vectors over a mode register."""

    register: Tuple[Mode, ...]
    terms: Mapping[Occupation, complex] = field(repr=False)
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        register = _check_register(self.register)
        object.__setattr__(self, "register", register)
        pruned = {}
        for occ, amp in self.terms.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(register):
                raise ValidationError(f"occupation {occ} does not match register size")
            if any(n < 0 for n in occ):
                raise ValidationError(f"negative occupation in {occ}")
            if sum(occ) > self.cutoff:
                raise TruncationError(
                    f"term {occ} has {sum(occ)} photons, cutoff is {self.cutoff}"
                )
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                pruned[occ] = amp
        norm_sq = sum(abs(a) ** 2 for a in pruned.values())
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"Fock state is not normalized (norm^2 = {norm_sq!r})")
        object.__setattr__(self, "terms", pruned)

    @classmethod
    def create(
        cls,
        register: Sequence[Mode],
        photons: Sequence[Mapping[Mode, complex]],
        cutoff: int = DEFAULT_CUTOFF,
    ) -> "FockState":
        """Apply one creation operator per photon to the vacuum.

        Each photon is a map from mode to amplitude, i.e. the operator
        ``sum_m c_m a_m^dagger``.
        """
        register = _check_register(register)
        index = {m: i for i, m in enumerate(register)}
        poly: Dict[Occupation, complex] = {(0,) * len(register): 1.0 + 0j}
        for photon in photons:
            try:
                image = [(index[m], complex(c)) for m, c in photon.items() if c != 0]
            except KeyError as exc:
                raise SubsystemLookupError(f"mode {exc.args[0]} not in register") from None
            poly = _multiply(poly, image)
        return cls(register, _monomials_to_terms(poly), cutoff)

    def amplitude(self, occupation: Mapping[Mode, int]) -> complex:
        occ = [0] * len(self.register)
        for mode, n in occupation.items():
            occ[self.register.index(mode)] = n
        return self.terms.get(tuple(occ), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def path_counts(self, occupation: Occupation) -> Dict[str, int]:
        """Photon number per spatial path for one occupation vector."""
        counts: Dict[str, int] = defaultdict(int)
        for mode, n in zip(self.register, occupation):
            counts[mode.path] += n
        return dict(counts)


def _multiply(poly: Dict[Occupation, complex], image) -> Dict[Occupation, complex]:
    """Multiply a polynomial in creation operators by a linear form."""
    out: Dict[Occupation, complex] = defaultdict(complex)
    for mono, coeff in poly.items():
        for j, c in image:
            bumped = list(mono)
            bumped[j] += 1
            out[tuple(bumped)] += coeff * c
    return out


def _monomials_to_terms(poly: Mapping[Occupation, complex]) -> Dict[Occupation, complex]:
    # prod (a^dag)^k |0> = prod sqrt(k!) |k>
    return {mono: c * _factorial_sqrt(mono) for mono, c in poly.items()}


@dataclass(frozen=True)
class ModeUnitary:
    """Linear map of creation operators: ``a_in[k]^dag -> sum_j matrix[j, k] a_out[j]^dag``.

    ``output_modes`` defaults to ``acted_modes`` (an in-place transformation).
    """

    matrix: np.ndarray = field(repr=False)
    acted_modes: Tuple[Mode, ...]
    output_modes: Optional[Tuple[Mode, ...]] = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        acted = _check_register(self.acted_modes)
        outputs = acted if self.output_modes is None else _check_register(self.output_modes)
        n = len(acted)
        if matrix.shape != (n, n) or len(outputs) != n:
            raise DimensionError(f"matrix shape {matrix.shape} does not match {n} modes")
        if np.max(np.abs(matrix.conj().T @ matrix - np.eye(n))) > 1e-12:
            raise ValidationError("mode transformation is not unitary")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "acted_modes", acted)
        object.__setattr__(self, "output_modes", outputs)


def beam_splitter(
    pols: Sequence[str] = LINEAR,
    tags: Sequence[int] = (0,),
    in_paths: Tuple[str, str] = ("a", "b"),
    out_paths: Tuple[str, str] = ("A", "B"),
) -> ModeUnitary:
    """Balanced symmetric splitter: transmission 1/sqrt2, reflection i/sqrt2.

    The 2x2 transform acts identically on every (polarization, tag) sublevel.
    """
    core = np.array([[1.0, 1j], [1j, 1.0]]) / math.sqrt(2.0)
    sub = [(p, t) for p in pols for t in tags]
    acted = tuple(Mode(path, p, t) for path in in_paths for p, t in sub)
    outputs = tuple(Mode(path, p, t) for path in out_paths for p, t in sub)
    return ModeUnitary(np.kron(core, np.eye(len(sub))), acted, outputs)


def apply_mode_unitary(state: FockState, u: ModeUnitary) -> FockState:
    """Substitute every acted creation operator by its image and re-expand."""
    register = state.register
    missing = [m for m in u.acted_modes if m not in register]
    if missing:
        raise SubsystemLookupError(f"modes {missing} not in register")
    position = {m: k for k, m in enumerate(u.acted_modes)}
    new_register = tuple(
        u.output_modes[position[m]] if m in position else m for m in register
    )
    # Raises if an output mode collides with an untouched mode.
    new_register = _check_register(new_register)
    new_index = {m: i for i, m in enumerate(new_register)}

    images = []
    for m in register:
        if m in position:
            k = position[m]
            images.append([
                (new_index[out], u.matrix[j, k])
                for j, out in enumerate(u.output_modes) if u.matrix[j, k] != 0
            ])
        else:
            images.append([(new_index[m], 1.0 + 0j)])

    result: Dict[Occupation, complex] = defaultdict(complex)
    vacuum = (0,) * len(new_register)
    for occ, amp in state.terms.items():
        poly: Dict[Occupation, complex] = {vacuum: amp / _factorial_sqrt(occ)}
        for i, n in enumerate(occ):
            for _ in range(n):
                poly = _multiply(poly, images[i])
        for mono, c in _monomials_to_terms(poly).items():
            result[mono] += c
    return FockState(new_register, result, state.cutoff)


def classify_outputs(state: FockState, paths: Tuple[str, str] = ("A", "B")) -> OutcomeDistribution:
    """Sum probabilities of two-photon output terms by detector pattern."""
    a, b = paths
    p = {"coinc": 0.0, "A": 0.0, "B": 0.0}
    for occ, amp in state.terms.items():
        counts = state.path_counts(occ)
        na, nb = counts.get(a, 0), counts.get(b, 0)
        if na + nb != 2:
            raise ValidationError(f"term {occ} does not hold two detected photons")
        key = "coinc" if na == 1 else ("A" if na == 2 else "B")
        p[key] += abs(amp) ** 2
    return OutcomeDistribution(p["coinc"], p["A"], p["B"])


def _eigencomponents(rho: DensityMatrix):
    if rho.dim != 2:
        raise DimensionError("expected a single-photon polarization density matrix")
    weights, vectors = np.linalg.eigh(rho.matrix)
    return [(float(w), vectors[:, k]) for k, w in enumerate(weights) if w > PRUNE_TOL]


def hom_output_distribution(
    pol1: DensityMatrix, pol2: DensityMatrix, eta: float
) -> OutcomeDistribution:
    """Detector statistics of two photons meeting on a balanced splitter.

    Photon 1 enters arm ``a`` in wavepacket tag 0. Photon 2 enters arm ``b``
    spread over tags 0 and 1 with amplitudes sqrt(eta), sqrt(1 - eta), so its
    squared temporal overlap with photon 1 is ``eta``. Each pair of
    polarization eigencomponents is propagated through the splitter exactly.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0 or math.isnan(eta):
        raise ParameterError(f"temporal overlap must lie in [0, 1], got {eta}")
    for rho in (pol1, pol2):
        if not isinstance(rho, DensityMatrix):
            raise ValidationError("inputs must be DensityMatrix instances")

    tags = (0, 1)
    bs = beam_splitter(LINEAR, tags)
    register = bs.acted_modes
    tag_amps = (math.sqrt(eta), math.sqrt(1.0 - eta))

    totals = np.zeros(3)
    for w1, u in _eigencomponents(pol1):
        for w2, v in _eigencomponents(pol2):
            photon1 = {Mode("a", p, 0): u[k] for k, p in enumerate(LINEAR)}
            photon2 = {
                Mode("b", p, t): v[k] * tag_amps[t]
                for k, p in enumerate(LINEAR) for t in tags
            }
            state = FockState.create(register, [photon1, photon2])
            probs = classify_outputs(apply_mode_unitary(state, bs))
            totals += w1 * w2 * np.array(
                [probs.p_coincidence, probs.p_both_A, probs.p_both_B]
            )
    totals /= totals.sum()
    return OutcomeDistribution(*map(float, totals))


POLYPRISM_PATHS = ("path1", "path2")


def polyprism_route(photon: PureState) -> FockState:
    """Send the R component of a one-photon polarization state to path 1, L to path 2."""
    if len(photon.space) != 1:
        raise ValidationError("expected a single-photon polarization state")
    name = photon.names[0]
    circ = to_circular(photon, name)
    register = (Mode(POLYPRISM_PATHS[0], "R"), Mode(POLYPRISM_PATHS[1], "L"))
    terms = {
        (1, 0): circ.amplitude("R"),
        (0, 1): circ.amplitude("L"),
    }
    return FockState(register, terms, cutoff=1)


__all__ = [
    "CIRCULAR",
    "DEFAULT_CUTOFF",
    "FockState",
    "Mode",
    "ModeUnitary",
    "POLYPRISM_PATHS",
    "apply_mode_unitary",
    "beam_splitter",
    "classify_outputs",
    "hom_output_distribution",
    "polyprism_route",
]
