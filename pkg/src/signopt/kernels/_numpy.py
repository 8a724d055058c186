"""Pure-numpy simulation kernels (fallback backend).

Semantics mirror the numba backend exactly: edge contributions are
accumulated source-side first and sink-side second (one sequential
``np.add.at`` over the concatenated index list reproduces the numba
loop's rounding), and all randomness comes from the shared counter hash
in ``_rng``.
"""

from __future__ import annotations

import numpy as np

from . import _rng

OVERFLOW_LIMIT = 1e12

# algorithm codes shared with the numba backend
ALGO_SIGN = 0
ALGO_NOISY = 1
ALGO_ACTIVATED = 2
ALGO_LINEAR = 3

# local objective family codes
LOC_ABS = 0
LOC_QUANTILE = 1
LOC_QUADRATIC = 2


def rho_at(skind: int, s1: float, s2: float, k: int) -> float:
    """Stepsize of update k (k counts from 1)."""
    if skind == 0:  # power law k^(-alpha), defined from k=1
        return float(k) ** (-s1)
    if skind == 1:  # constant
        return s1
    if s2 > 0.0:  # affine reciprocal a/(k+b) with k counting from 0
        return s1 / ((k - 1) + s2)
    return s1 / k  # a/k with k counting from 1


class _Locals:
    """Vectorized evaluation of the per-node objective family table."""

    def __init__(self, lkind, lp):
        self.n = lkind.shape[0]
        self.abs_idx = np.where(lkind == LOC_ABS)[0]
        self.qnt_idx = np.where(lkind == LOC_QUANTILE)[0]
        self.qud_idx = np.where(lkind == LOC_QUADRATIC)[0]
        self.abs_s = lp[self.abs_idx, 0]
        self.qnt_a = lp[self.qnt_idx, 0]
        self.qnt_y = lp[self.qnt_idx, 1]
        self.qnt_s = lp[self.qnt_idx, 2]
        self.qud_a = lp[self.qud_idx, 0]
        self.qud_b = lp[self.qud_idx, 1]

    def f_nodes(self, x):
        """Total objective sum_j f_j evaluated at every node state x_i."""
        # row order matches the original local order so the axis-0 sum
        # rounds like the numba backend's ascending-j loop
        F = np.empty((self.n, x.shape[0]))
        if self.abs_idx.size:
            F[self.abs_idx] = np.abs(x[None, :] - self.abs_s[:, None])
        if self.qnt_idx.size:
            u = self.qnt_y[:, None] - x[None, :] * self.qnt_s[:, None]
            F[self.qnt_idx] = np.where(
                u >= 0.0, self.qnt_a[:, None] * u, (self.qnt_a[:, None] - 1.0) * u
            )
        if self.qud_idx.size:
            dx = x[None, :] - self.qud_b[:, None]
            F[self.qud_idx] = self.qud_a[:, None] * dx * dx
        return F.sum(axis=0)

    def own_subgrad(self, x):
        """Subgradient of node i's own local at x_i, for every i."""
        g = np.empty(x.shape[0])
        if self.abs_idx.size:
            g[self.abs_idx] = np.sign(x[self.abs_idx] - self.abs_s)
        if self.qnt_idx.size:
            u = self.qnt_y - x[self.qnt_idx] * self.qnt_s
            g[self.qnt_idx] = np.where(
                u >= 0.0, -self.qnt_a * self.qnt_s, (1.0 - self.qnt_a) * self.qnt_s
            )
        if self.qud_idx.size:
            g[self.qud_idx] = 2.0 * self.qud_a * (x[self.qud_idx] - self.qud_b)
        return g


def run_sim(algo, x0, eu, ev, ew, pe, sig, lkind, lp, lam, seed,
            skind, s1, s2, K, rec_ks, oracle_lo, oracle_hi, tail_start):
    """Iterate K updates, recording metrics at the steps in rec_ks.

    Returns (states, v, xbar, d, fnodes, minf0, minf1, max_d_tail,
    abort_k, abort_rho); abort_k is -1 on clean completion.
    """
    n = x0.shape[0]
    R = rec_ks.shape[0]
    states = np.zeros((R, n))
    vrec = np.zeros(R)
    xbrec = np.zeros(R)
    drec = np.full(R, np.nan)
    fnrec = np.zeros((R, n))
    m0rec = np.zeros((R, n))
    m1rec = np.zeros((R, n))

    have_oracle = bool(np.isfinite(oracle_lo) and np.isfinite(oracle_hi))
    loc = _Locals(lkind, lp)
    x = x0.astype(np.float64).copy()
    fcur = loc.f_nodes(x)
    minf0 = fcur.copy()
    minf1 = np.full(n, np.inf)
    max_d_tail = np.nan
    idx_both = np.concatenate([eu, ev])

    def _dist(xv):
        xb = xv.sum() / n
        a = min(max(xb, oracle_lo), oracle_hi)
        dx = xv - a
        return np.sqrt((dx * dx).sum())

    ri = 0

    def _record(i):
        states[i] = x
        vrec[i] = x.max() - x.min()
        xbrec[i] = x.sum() / n
        if have_oracle:
            drec[i] = _dist(x)
        fnrec[i] = fcur
        m0rec[i] = minf0
        m1rec[i] = minf1

    if R and rec_ks[0] == 0:
        _record(0)
        ri = 1

    abort_k = -1
    abort_rho = 0.0
    for k in range(1, int(K) + 1):
        rho = rho_at(skind, s1, s2, k)
        gvec = loc.own_subgrad(x)
        if algo == ALGO_SIGN:
            su = np.sign(x[ev] - x[eu])
            sv = np.sign(x[eu] - x[ev])
            acc = np.zeros(n)
            np.add.at(acc, idx_both, np.concatenate([ew * su, ew * sv]))
            x = (x + (lam * rho) * acc) - rho * gvec
        elif algo == ALGO_NOISY:
            zu = _rng.normal_pairs(seed, k, eu, ev)
            zv = _rng.normal_pairs(seed, k, ev, eu)
            su = np.sign((x[ev] - x[eu]) + sig * zu)
            sv = np.sign((x[eu] - x[ev]) + sig * zv)
            acc = np.zeros(n)
            np.add.at(acc, idx_both, np.concatenate([ew * su, ew * sv]))
            x = (x + (lam * rho) * acc) - rho * gvec
        elif algo == ALGO_ACTIVATED:
            act = _rng.uniform_pairs(seed, k, eu, ev, _rng.STREAM_ACTIVATION) <= pe
            su = np.sign(x[ev] - x[eu])
            sv = np.sign(x[eu] - x[ev])
            acc = np.zeros(n)
            np.add.at(acc, np.concatenate([eu[act], ev[act]]),
                      np.concatenate([su[act], sv[act]]))
            x = (x + (lam * rho) * acc) - rho * gvec
        else:  # ALGO_LINEAR: exact relative state, no lambda on the mix
            du = x[ev] - x[eu]
            dv = x[eu] - x[ev]
            acc = np.zeros(n)
            np.add.at(acc, idx_both, np.concatenate([ew * du, ew * dv]))
            x = (x + acc) - rho * gvec

        fcur = loc.f_nodes(x)
        np.minimum(minf0, fcur, out=minf0)
        np.minimum(minf1, fcur, out=minf1)
        if have_oracle and k >= tail_start:
            dd = _dist(x)
            if not (dd <= max_d_tail):  # also seeds the initial nan
                max_d_tail = dd
        if not (np.abs(x).max() <= OVERFLOW_LIMIT):
            abort_k = k
            abort_rho = rho
            break
        if ri < R and k == rec_ks[ri]:
            _record(ri)
            ri += 1

    return (states, vrec, xbrec, drec, fnrec, m0rec, m1rec,
            max_d_tail, abort_k, abort_rho)


def grid_scan(eu, ev, ew, lkind, lp, lam, lo, step, npts, near_tol):
    """Exhaustive scan of the penalized objective over a uniform n-D grid.

    Grid coordinate d of index t is lo + t*step.  Returns
    (min_value, near_count, near_max_spread, near_mean_lo, near_mean_hi)
    where "near" means value <= min_value + near_tol.
    """
    n = lkind.shape[0]
    loc = _Locals(lkind, lp)
    coords = lo + np.arange(npts) * step
    if n == 1:
        vals = loc.f_nodes(coords)
        minval = vals.min()
        near = vals <= minval + near_tol
        xs = coords[near]
        return float(minval), int(near.sum()), 0.0, float(xs.min()), float(xs.max())

    # vectorize the last two dims; iterate an odometer over the rest
    c1 = np.repeat(coords, npts)
    c2 = np.tile(coords, npts)
    chunk = np.empty((npts * npts, n))
    chunk[:, n - 2] = c1
    chunk[:, n - 1] = c2

    def _eval(block):
        g = np.zeros(block.shape[0])
        for i in range(n):
            xi = block[:, i]
            kind = lkind[i]
            if kind == LOC_ABS:
                g += np.abs(xi - lp[i, 0])
            elif kind == LOC_QUANTILE:
                u = lp[i, 1] - xi * lp[i, 2]
                g += np.where(u >= 0.0, lp[i, 0] * u, (lp[i, 0] - 1.0) * u)
            else:
                dxi = xi - lp[i, 1]
                g += lp[i, 0] * dxi * dxi
        h = np.zeros(block.shape[0])
        for e in range(eu.shape[0]):
            h += ew[e] * np.abs(block[:, eu[e]] - block[:, ev[e]])
        return g + lam * h

    outer_shape = (npts,) * (n - 2)
    minval = np.inf
    for idx in np.ndindex(*outer_shape):
        for d, t in enumerate(idx):
            chunk[:, d] = coords[t]
        m = _eval(chunk).min()
        if m < minval:
            minval = m

    thresh = minval + near_tol
    near_count = 0
    near_max_spread = 0.0
    near_mean_lo = np.inf
    near_mean_hi = -np.inf
    for idx in np.ndindex(*outer_shape):
        for d, t in enumerate(idx):
            chunk[:, d] = coords[t]
        vals = _eval(chunk)
        mask = vals <= thresh
        cnt = int(mask.sum())
        if cnt:
            near_count += cnt
            pts = chunk[mask]
            spread = (pts.max(axis=1) - pts.min(axis=1)).max()
            if spread > near_max_spread:
                near_max_spread = spread
            means = pts.mean(axis=1)
            near_mean_lo = min(near_mean_lo, means.min())
            near_mean_hi = max(near_mean_hi, means.max())

    return (float(minval), near_count, float(near_max_spread),
            float(near_mean_lo), float(near_mean_hi))


def uniform_pairs(seed, k, i, j, stream):
    return _rng.uniform_pairs(seed, k, i, j, stream)


def normal_pairs(seed, k, i, j):
    return _rng.normal_pairs(seed, k, i, j)
