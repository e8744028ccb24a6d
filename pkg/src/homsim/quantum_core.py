"""Finite-dimensional state algebra on labelled tensor-product spaces.

A space is an ordered tuple of :class:`Subsystem` objects. Basis labels are
tuples of level names, one per subsystem, in space order. Pure states keep a
sparse amplitude map; density matrices are dense (every space used here has
dimension 12 or less).
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from homsim.errors import (
    CompositionError,
    DimensionError,
    ParameterError,
    SubsystemLookupError,
    ValidationError,
)

PRUNE_TOL = 1e-14
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGEN_TOL = -1e-10

Label = Tuple[str, ...]

LINEAR = ("H", "V")
CIRCULAR = ("R", "L")

# Columns: R = (H + iV)/sqrt2, L = (H - iV)/sqrt2, expressed over (H, V).
CIRCULAR_TO_LINEAR = np.array([[1.0, 1.0], [1j, -1j]]) / math.sqrt(2.0)
LINEAR_TO_CIRCULAR = CIRCULAR_TO_LINEAR.conj().T


@dataclass(frozen=True)
class Subsystem:
    """A named factor of a tensor-product space with a finite level alphabet."""

    name: str
    levels: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise ValidationError(f"subsystem {self.name!r} has no levels")
        if len(set(self.levels)) != len(self.levels):
            raise ValidationError(f"subsystem {self.name!r} has repeated levels")

    @property
    def dim(self) -> int:
        return len(self.levels)

    def index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise ValidationError(
                f"level {level!r} not in alphabet {self.levels} of {self.name!r}"
            ) from None


Space = Tuple[Subsystem, ...]


def _names(space: Space) -> Tuple[str, ...]:
    return tuple(s.name for s in space)


def _check_space(space: Sequence[Subsystem]) -> Space:
    space = tuple(space)
    names = _names(space)
    if len(set(names)) != len(names):
        raise CompositionError(f"duplicate subsystem names in {names}")
    return space


def basis_labels(space: Space) -> list:
    """All basis labels of ``space`` in row-major order (first subsystem slowest)."""
    return list(itertools.product(*(s.levels for s in space)))


def _flat_index(space: Space, label: Label) -> int:
    idx = 0
    for sub, level in zip(space, label):
        idx = idx * sub.dim + sub.index(level)
    return idx


def _position(space: Space, name: str) -> int:
    for i, sub in enumerate(space):
        if sub.name == name:
            return i
    raise SubsystemLookupError(f"no subsystem named {name!r} in {_names(space)}")


@dataclass(frozen=True)
class PureState:
    """Normalized ket stored as a sparse map from basis label to amplitude.

    Amplitudes smaller than ``PRUNE_TOL`` in magnitude are dropped on
    construction so that interference cancellations leave structural zeros.
    """

    space: Space
    amplitudes: Mapping[Label, complex] = field(repr=False)

    def __post_init__(self):
        space = _check_space(self.space)
        object.__setattr__(self, "space", space)
        pruned = {}
        for label, amp in self.amplitudes.items():
            label = tuple(label)
            if len(label) != len(space):
                raise ValidationError(
                    f"label {label} does not match space {_names(space)}"
                )
            for sub, level in zip(space, label):
                sub.index(level)
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                pruned[label] = amp
        norm_sq = sum(abs(a) ** 2 for a in pruned.values())
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (norm^2 = {norm_sq!r})")
        object.__setattr__(self, "amplitudes", pruned)

    @classmethod
    def ket(cls, subsystem: Subsystem, level: str) -> "PureState":
        return cls((subsystem,), {(level,): 1.0})

    @classmethod
    def from_vector(cls, space: Sequence[Subsystem], vector) -> "PureState":
        space = _check_space(space)
        vector = np.asarray(vector, dtype=complex).ravel()
        labels = basis_labels(space)
        if vector.shape[0] != len(labels):
            raise DimensionError(
                f"vector length {vector.shape[0]} != space dimension {len(labels)}"
            )
        return cls(space, dict(zip(labels, vector)))

    @property
    def names(self) -> Tuple[str, ...]:
        return _names(self.space)

    @property
    def dim(self) -> int:
        return math.prod(s.dim for s in self.space)

    def amplitude(self, *levels: str) -> complex:
        return self.amplitudes.get(tuple(levels), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        for label, amp in self.amplitudes.items():
            vec[_flat_index(self.space, label)] = amp
        return vec


def tensor(a: PureState, b: PureState) -> PureState:
    """Product state, subsystems of ``a`` first."""
    overlap = set(a.names) & set(b.names)
    if overlap:
        raise CompositionError(f"subsystems {sorted(overlap)} appear in both factors")
    amps = {
        la + lb: xa * xb
        for la, xa in a.amplitudes.items()
        for lb, xb in b.amplitudes.items()
    }
    return PureState(a.space + b.space, amps)


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.space != b.space:
        raise DimensionError(f"spaces differ: {a.space} vs {b.space}")
    return sum(
        (amp.conjugate() * b.amplitudes[label]
         for label, amp in a.amplitudes.items() if label in b.amplitudes),
        0j,
    )


def change_basis(
    state: PureState, name: str, new_levels: Sequence[str], matrix
) -> PureState:
    """Re-express subsystem ``name`` in a new level alphabet.

    ``matrix[j, k]`` is the amplitude of new level ``j`` in old level ``k``;
    it must be unitary.
    """
    pos = _position(state.space, name)
    old = state.space[pos]
    new = Subsystem(name, tuple(new_levels))
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (new.dim, old.dim):
        raise DimensionError(f"basis matrix shape {matrix.shape} != {(new.dim, old.dim)}")
    if not np.allclose(matrix.conj().T @ matrix, np.eye(old.dim), atol=NORM_TOL, rtol=0):
        raise ValidationError("basis-change matrix is not unitary")
    out = defaultdict(complex)
    for label, amp in state.amplitudes.items():
        k = old.index(label[pos])
        for j, level in enumerate(new.levels):
            c = matrix[j, k]
            if c != 0:
                out[label[:pos] + (level,) + label[pos + 1:]] += c * amp
    space = state.space[:pos] + (new,) + state.space[pos + 1:]
    return PureState(space, out)


def to_linear(state: PureState, name: str) -> PureState:
    """Circular (R, L) polarization levels of ``name`` rewritten over (H, V)."""
    sub = state.space[_position(state.space, name)]
    if sub.levels == LINEAR:
        return state
    if sub.levels != CIRCULAR:
        raise ValidationError(f"{name!r} is not a polarization subsystem: {sub.levels}")
    return change_basis(state, name, LINEAR, CIRCULAR_TO_LINEAR)


def to_circular(state: PureState, name: str) -> PureState:
    """Linear (H, V) polarization levels of ``name`` rewritten over (R, L)."""
    sub = state.space[_position(state.space, name)]
    if sub.levels == CIRCULAR:
        return state
    if sub.levels != LINEAR:
        raise ValidationError(f"{name!r} is not a polarization subsystem: {sub.levels}")
    return change_basis(state, name, CIRCULAR, LINEAR_TO_CIRCULAR)


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on a labelled space.

    The matrix is validated and frozen on construction.
    """

    __slots__ = ("space", "matrix")

    def __init__(self, space: Sequence[Subsystem], matrix):
        space = _check_space(space)
        dim = math.prod(s.dim for s in space)
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (dim, dim):
            raise DimensionError(f"matrix shape {matrix.shape} != ({dim}, {dim})")
        if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(matrix)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        if np.min(np.linalg.eigvalsh(matrix)) < EIGEN_TOL:
            raise ValidationError("density matrix has a negative eigenvalue")
        matrix.setflags(write=False)
        self.space = space
        self.matrix = matrix

    @classmethod
    def maximally_mixed(cls, space: Sequence[Subsystem]) -> "DensityMatrix":
        dim = math.prod(s.dim for s in space)
        return cls(space, np.eye(dim) / dim)

    @property
    def names(self) -> Tuple[str, ...]:
        return _names(self.space)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def entry(self, row: Label, col: Label) -> complex:
        return complex(self.matrix[_flat_index(self.space, tuple(row)),
                                   _flat_index(self.space, tuple(col))])

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.space, self.matrix.tobytes()))

    def __repr__(self):
        return f"DensityMatrix(names={self.names}, matrix={self.matrix.tolist()})"

    def allclose(self, other: "DensityMatrix", atol: float = 1e-12) -> bool:
        return self.space == other.space and bool(
            np.max(np.abs(self.matrix - other.matrix)) <= atol
        )


def to_density(psi: PureState) -> DensityMatrix:
    vec = psi.to_vector()
    return DensityMatrix(psi.space, np.outer(vec, vec.conj()))


def mixture(weights: Sequence[float], states: Sequence[DensityMatrix]) -> DensityMatrix:
    """Convex combination of density matrices on a common space."""
    if len(weights) != len(states) or not states:
        raise ValidationError("need one weight per state and at least one state")
    space = states[0].space
    if any(s.space != space for s in states):
        raise DimensionError("mixture components live on different spaces")
    if any(w < 0 for w in weights):
        raise ParameterError("mixture weights must be nonnegative")
    total = sum(w * s.matrix for w, s in zip(weights, states))
    return DensityMatrix(space, total)


def partial_trace(rho: DensityMatrix, keep: Union[str, Iterable[str]]) -> DensityMatrix:
    """Trace out every subsystem not named in ``keep``; kept order follows ``rho``."""
    keep = {keep} if isinstance(keep, str) else set(keep)
    if not keep:
        raise ValidationError("keep must name at least one subsystem")
    for name in keep:
        _position(rho.space, name)
    dims = [s.dim for s in rho.space]
    n = len(dims)
    tensor_ = rho.matrix.reshape(dims + dims)
    kept = [i for i, s in enumerate(rho.space) if s.name in keep]
    # Contract traced pairs from the highest index down so lower axes stay put.
    current = n
    for i in reversed(range(n)):
        if i in kept:
            continue
        tensor_ = np.trace(tensor_, axis1=i, axis2=i + current)
        current -= 1
    kept_dim = math.prod(dims[i] for i in kept)
    space = tuple(rho.space[i] for i in kept)
    return DensityMatrix(space, tensor_.reshape(kept_dim, kept_dim))


def dephase(rho: DensityMatrix, gamma: float, subsystem: Optional[str] = None) -> DensityMatrix:
    """Scale coherences between distinct levels by ``1 - gamma``.

    With ``subsystem`` given, only entries whose row and column differ in that
    subsystem's level are scaled; otherwise every off-diagonal entry is.
    """
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0 or math.isnan(gamma):
        raise ParameterError(f"dephasing strength must lie in [0, 1], got {gamma}")
    if subsystem is None:
        mask = ~np.eye(rho.dim, dtype=bool)
    else:
        pos = _position(rho.space, subsystem)
        dims = [s.dim for s in rho.space]
        level = np.indices(dims).reshape(len(dims), -1)[pos]
        mask = level[:, None] != level[None, :]
    out = np.where(mask, (1.0 - gamma) * rho.matrix, rho.matrix)
    return DensityMatrix(rho.space, out)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2)."""
    return float(np.real(np.sum(rho.matrix * rho.matrix.T)))
