"""Counter-keyed pseudo-random draws (vectorized numpy form).

Every draw is a pure function of (seed, step, i, j, stream): the packed
counter goes through two splitmix64 finalizer rounds mixed with a
seed/stream key.  There is no generator state, so draws do not depend on
evaluation order and are identical across thread counts.  The numba
backend re-implements the same integer arithmetic scalar-wise; the two
agree bit for bit.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
MASK64 = 0xFFFFFFFFFFFFFFFF

# Stream ids are part of the reproducibility contract; do not renumber.
STREAM_NORMAL_A = 1
STREAM_NORMAL_B = 2
STREAM_ACTIVATION = 3
STREAM_WEIGHTS = 4

# The counter packs j into 11 bits and i into the next 11.
MAX_NODES = 2048

INV_2_53 = 2.0 ** -53
TWO_PI = 2.0 * np.pi


def counter(k, i, j):
    """Pack (step, i, j) into one uint64 counter. Requires i, j < 2048."""
    k = np.asarray(k, dtype=np.uint64)
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    return (k << np.uint64(22)) ^ (i << np.uint64(11)) ^ j


def _fin(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def _fin_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * int(MIX1)) & MASK64
    z = ((z ^ (z >> 27)) * int(MIX2)) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> np.uint64:
    # exact python-int arithmetic; avoids numpy scalar overflow warnings
    raw = (int(seed) + GOLDEN * (stream + 1)) & MASK64
    return np.uint64(_fin_int(raw))


def draw_u64(seed, c, stream):
    """Hash counters `c` (uint64 array) into uniform uint64 words."""
    key = stream_key(seed, stream)
    return _fin(key ^ _fin(c * np.uint64(GOLDEN)))


def uniform_from(seed, c, stream):
    """Uniform floats in (0, 1] from counters `c`."""
    w = draw_u64(seed, c, stream)
    return ((w >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * INV_2_53


def normal_from(seed, c):
    """Standard normal draws from counters `c` via Box-Muller."""
    u1 = uniform_from(seed, c, STREAM_NORMAL_A)
    u2 = uniform_from(seed, c, STREAM_NORMAL_B)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)


def uniform_pairs(seed, k, i, j, stream):
    """Uniform (0, 1] draw keyed on (seed, k, i, j, stream); array args ok."""
    c = counter(k, i, j)
    # keep the hash on >=1-d arrays: numpy only warns on scalar overflow
    return uniform_from(seed, np.atleast_1d(c), stream).reshape(c.shape)


def normal_pairs(seed, k, i, j):
    """Standard normal draw keyed on (seed, k, i, j); array args ok."""
    c = counter(k, i, j)
    return normal_from(seed, np.atleast_1d(c)).reshape(c.shape)
