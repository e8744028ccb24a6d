"""Counter-style random streams keyed by (master seed, trial index).

Trials are grouped into fixed blocks of ``BLOCK_SIZE``. Block ``k`` draws
from ``SeedSequence(seed, spawn_key=(k,))`` and each trial takes exactly
``DRAWS_PER_TRIAL`` consecutive uniforms from that block, one per slot.
A trial's draws therefore depend only on the seed and the trial index, and
blocks can be generated in any order or in parallel.
"""

from __future__ import annotations

import numpy as np

from homsim.errors import ParameterError

BLOCK_SIZE = 4096
DRAWS_PER_TRIAL = 3

SLOT_APPARATUS_1 = 0
SLOT_APPARATUS_2 = 1
SLOT_DETECTION = 2


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ParameterError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for sub-run ``index`` (e.g. one point of a sweep)."""
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=(int(index),))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _block_generator(seed: int, block: int, skip_trials: int = 0) -> np.random.Generator:
    bits = np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,)))
    if skip_trials:
        # one 64-bit output per double
        bits.advance(skip_trials * DRAWS_PER_TRIAL)
    return np.random.Generator(bits)


def _block(seed: int, block: int) -> np.ndarray:
    return _block_generator(seed, block).random((BLOCK_SIZE, DRAWS_PER_TRIAL))


def trial_uniforms(seed: int, trials: int, start: int = 0) -> np.ndarray:
    """Uniform draws for trials ``start .. start + trials - 1``, shape (trials, 3)."""
    seed = _check_seed(seed)
    if trials < 0 or start < 0:
        raise ParameterError("trial range must be nonnegative")
    if trials == 0:
        return np.empty((0, DRAWS_PER_TRIAL))
    stop = start + trials
    first, last = start // BLOCK_SIZE, (stop - 1) // BLOCK_SIZE
    chunks = [_block(seed, b) for b in range(first, last + 1)]
    stacked = np.concatenate(chunks)
    offset = first * BLOCK_SIZE
    return stacked[start - offset: stop - offset]


class TrialStream:
    """The draws belonging to a single trial, handed out slot by slot.

    Quacks like the part of :class:`numpy.random.Generator` the simulator
    uses (``random()`` with no arguments).
    """

    def __init__(self, seed: int, index: int, slot: int = 0):
        seed = _check_seed(seed)
        if index < 0 or not 0 <= slot < DRAWS_PER_TRIAL:
            raise ParameterError("trial index and slot must be in range")
        block, offset = divmod(int(index), BLOCK_SIZE)
        self._draws = _block_generator(seed, block, offset).random(DRAWS_PER_TRIAL)
        self._next = slot

    def random(self) -> float:
        if self._next >= DRAWS_PER_TRIAL:
            raise RuntimeError("trial stream exhausted")
        value = float(self._draws[self._next])
        self._next += 1
        return value
