"""Kernel backend selection.

The hot loops (iteration engines, grid certification, bulk draws) run
through numba-compiled kernels when numba is importable.  Setting the
environment variable ``SIGNOPT_BACKEND`` to ``numpy`` forces the pure
numpy fallback; ``numba`` forces numba and raises if it is missing.
Both backends implement the same contracts and are exercised by the
same test suite.
"""

from __future__ import annotations

import os

import numpy as np

from . import _numpy as _numpy_impl
from . import _rng

OVERFLOW_LIMIT = _numpy_impl.OVERFLOW_LIMIT

_requested = os.environ.get("SIGNOPT_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"SIGNOPT_BACKEND={_requested!r} not recognized (use 'numba' or 'numpy')"
    )

if _requested == "numpy":
    _impl = _numpy_impl
    _BACKEND = "numpy"
else:
    try:
        from . import _numba as _numba_impl

        _impl = _numba_impl
        _BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _impl = _numpy_impl
        _BACKEND = "numpy"


def backend_name() -> str:
    return _BACKEND


def run_sim(algo, x0, eu, ev, ew, pe, sig, lkind, lp, lam, seed,
            skind, s1, s2, K, rec_ks, oracle_lo, oracle_hi, tail_start):
    """Dispatch a full simulation to the selected backend."""
    return _impl.run_sim(
        int(algo),
        np.ascontiguousarray(x0, dtype=np.float64),
        np.ascontiguousarray(eu, dtype=np.int64),
        np.ascontiguousarray(ev, dtype=np.int64),
        np.ascontiguousarray(ew, dtype=np.float64),
        np.ascontiguousarray(pe, dtype=np.float64),
        np.ascontiguousarray(sig, dtype=np.float64),
        np.ascontiguousarray(lkind, dtype=np.int64),
        np.ascontiguousarray(lp, dtype=np.float64),
        float(lam),
        np.uint64(int(seed) & _rng.MASK64),
        int(skind),
        float(s1),
        float(s2),
        int(K),
        np.ascontiguousarray(rec_ks, dtype=np.int64),
        float(oracle_lo),
        float(oracle_hi),
        int(tail_start),
    )


def grid_scan(eu, ev, ew, lkind, lp, lam, lo, step, npts, near_tol):
    """Exhaustive minimum scan of the penalized objective over a grid."""
    return _impl.grid_scan(
        np.ascontiguousarray(eu, dtype=np.int64),
        np.ascontiguousarray(ev, dtype=np.int64),
        np.ascontiguousarray(ew, dtype=np.float64),
        np.ascontiguousarray(lkind, dtype=np.int64),
        np.ascontiguousarray(lp, dtype=np.float64),
        float(lam),
        float(lo),
        float(step),
        int(npts),
        float(near_tol),
    )


def uniform_pairs(seed, k, i, j, stream):
    """Uniform (0, 1] draws keyed on (seed, k, i, j, stream)."""
    if _BACKEND == "numpy":
        out = _impl.uniform_pairs(seed, k, i, j, stream)
        return out if out.shape else float(out)
    ks, ii, jj = np.broadcast_arrays(
        np.asarray(k, dtype=np.uint64),
        np.asarray(i, dtype=np.uint64),
        np.asarray(j, dtype=np.uint64),
    )
    shape = ks.shape
    out = _impl.uniform_pairs_flat(
        np.uint64(int(seed) & _rng.MASK64),
        np.ascontiguousarray(ks).ravel(),
        np.ascontiguousarray(ii).ravel(),
        np.ascontiguousarray(jj).ravel(),
        int(stream),
    )
    return out.reshape(shape) if shape else out[0]


def normal_pairs(seed, k, i, j):
    """Standard normal draws keyed on (seed, k, i, j)."""
    if _BACKEND == "numpy":
        out = _impl.normal_pairs(seed, k, i, j)
        return out if out.shape else float(out)
    ks, ii, jj = np.broadcast_arrays(
        np.asarray(k, dtype=np.uint64),
        np.asarray(i, dtype=np.uint64),
        np.asarray(j, dtype=np.uint64),
    )
    shape = ks.shape
    out = _impl.normal_pairs_flat(
        np.uint64(int(seed) & _rng.MASK64),
        np.ascontiguousarray(ks).ravel(),
        np.ascontiguousarray(ii).ravel(),
        np.ascontiguousarray(jj).ravel(),
    )
    return out.reshape(shape) if shape else out[0]
