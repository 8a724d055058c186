"""Numba-compiled simulation kernels (default backend).

Bit-compatible with the numpy fallback: same counter-keyed hash for all
draws, same two-pass edge accumulation order, same update expression
grouping.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OVERFLOW_LIMIT = 1e12

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SHIFT30 = np.uint64(30)
_SHIFT27 = np.uint64(27)
_SHIFT31 = np.uint64(31)
_SHIFT22 = np.uint64(22)
_SHIFT11 = np.uint64(11)
_ONE = np.uint64(1)

_STREAM_NORMAL_A = np.uint64(1)
_STREAM_NORMAL_B = np.uint64(2)
_STREAM_ACTIVATION = np.uint64(3)

_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * np.pi


@njit(cache=True)
def _fin(z):
    z = (z ^ (z >> _SHIFT30)) * _MIX1
    z = (z ^ (z >> _SHIFT27)) * _MIX2
    return z ^ (z >> _SHIFT31)


@njit(cache=True)
def _counter(k, i, j):
    return (k << _SHIFT22) ^ (i << _SHIFT11) ^ j


@njit(cache=True)
def _draw(seed, c, stream):
    key = _fin(seed + _GOLDEN * (stream + _ONE))
    return _fin(key ^ _fin(c * _GOLDEN))


@njit(cache=True)
def _u01(seed, c, stream):
    w = _draw(seed, c, stream)
    return ((w >> _SHIFT11) + _ONE) * _INV_2_53


@njit(cache=True)
def _normal(seed, c):
    u1 = _u01(seed, c, _STREAM_NORMAL_A)
    u2 = _u01(seed, c, _STREAM_NORMAL_B)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit(cache=True)
def _sign(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@njit(cache=True)
def _f_local(kind, p0, p1, p2, x):
    if kind == 0:  # abs deviation |x - s|
        return abs(x - p0)
    if kind == 1:  # quantile loss of residual y - x*s
        u = p1 - x * p2
        return p0 * u if u >= 0.0 else (p0 - 1.0) * u
    dx = x - p1  # quadratic a*(x-b)^2
    return p0 * dx * dx


@njit(cache=True)
def _g_local(kind, p0, p1, p2, x):
    if kind == 0:
        return _sign(x - p0)
    if kind == 1:
        u = p1 - x * p2
        return -p0 * p2 if u >= 0.0 else (1.0 - p0) * p2
    return 2.0 * p0 * (x - p1)


@njit(cache=True)
def _f_total(lkind, lp, x):
    s = 0.0
    for j in range(lkind.shape[0]):
        s += _f_local(lkind[j], lp[j, 0], lp[j, 1], lp[j, 2], x)
    return s


@njit(cache=True)
def _rho_at(skind, s1, s2, k):
    if skind == 0:
        return float(k) ** (-s1)
    if skind == 1:
        return s1
    if s2 > 0.0:
        return s1 / ((k - 1) + s2)
    return s1 / k


@njit(cache=True)
def run_sim(algo, x0, eu, ev, ew, pe, sig, lkind, lp, lam, seed,
            skind, s1, s2, K, rec_ks, oracle_lo, oracle_hi, tail_start):
    n = x0.shape[0]
    m = eu.shape[0]
    R = rec_ks.shape[0]
    states = np.zeros((R, n))
    vrec = np.zeros(R)
    xbrec = np.zeros(R)
    drec = np.full(R, np.nan)
    fnrec = np.zeros((R, n))
    m0rec = np.zeros((R, n))
    m1rec = np.zeros((R, n))

    have_oracle = math.isfinite(oracle_lo) and math.isfinite(oracle_hi)
    x = x0.copy()
    fcur = np.empty(n)
    for i in range(n):
        fcur[i] = _f_total(lkind, lp, x[i])
    minf0 = fcur.copy()
    minf1 = np.full(n, np.inf)
    acc = np.empty(n)
    gvec = np.empty(n)
    max_d_tail = np.nan

    ri = 0
    if R > 0 and rec_ks[0] == 0:
        for i in range(n):
            states[0, i] = x[i]
            fnrec[0, i] = fcur[i]
            m0rec[0, i] = minf0[i]
            m1rec[0, i] = minf1[i]
        vrec[0] = x.max() - x.min()
        xb = 0.0
        for i in range(n):
            xb += x[i]
        xb /= n
        xbrec[0] = xb
        if have_oracle:
            a = min(max(xb, oracle_lo), oracle_hi)
            dd = 0.0
            for i in range(n):
                dx = x[i] - a
                dd += dx * dx
            drec[0] = math.sqrt(dd)
        ri = 1

    abort_k = np.int64(-1)
    abort_rho = 0.0
    for k in range(1, K + 1):
        rho = _rho_at(skind, s1, s2, k)
        for i in range(n):
            gvec[i] = _g_local(lkind[i], lp[i, 0], lp[i, 1], lp[i, 2], x[i])
            acc[i] = 0.0
        if algo == 0:
            for e in range(m):
                acc[eu[e]] += ew[e] * _sign(x[ev[e]] - x[eu[e]])
            for e in range(m):
                acc[ev[e]] += ew[e] * _sign(x[eu[e]] - x[ev[e]])
            lr = lam * rho
            for i in range(n):
                x[i] = (x[i] + lr * acc[i]) - rho * gvec[i]
        elif algo == 1:
            ku = np.uint64(k)
            for e in range(m):
                c = _counter(ku, np.uint64(eu[e]), np.uint64(ev[e]))
                z = _normal(seed, c)
                acc[eu[e]] += ew[e] * _sign((x[ev[e]] - x[eu[e]]) + sig[e] * z)
            for e in range(m):
                c = _counter(ku, np.uint64(ev[e]), np.uint64(eu[e]))
                z = _normal(seed, c)
                acc[ev[e]] += ew[e] * _sign((x[eu[e]] - x[ev[e]]) + sig[e] * z)
            lr = lam * rho
            for i in range(n):
                x[i] = (x[i] + lr * acc[i]) - rho * gvec[i]
        elif algo == 2:
            ku = np.uint64(k)
            for e in range(m):
                c = _counter(ku, np.uint64(eu[e]), np.uint64(ev[e]))
                if _u01(seed, c, _STREAM_ACTIVATION) <= pe[e]:
                    acc[eu[e]] += _sign(x[ev[e]] - x[eu[e]])
            for e in range(m):
                c = _counter(ku, np.uint64(eu[e]), np.uint64(ev[e]))
                if _u01(seed, c, _STREAM_ACTIVATION) <= pe[e]:
                    acc[ev[e]] += _sign(x[eu[e]] - x[ev[e]])
            lr = lam * rho
            for i in range(n):
                x[i] = (x[i] + lr * acc[i]) - rho * gvec[i]
        else:
            for e in range(m):
                acc[eu[e]] += ew[e] * (x[ev[e]] - x[eu[e]])
            for e in range(m):
                acc[ev[e]] += ew[e] * (x[eu[e]] - x[ev[e]])
            for i in range(n):
                x[i] = (x[i] + acc[i]) - rho * gvec[i]

        maxabs = 0.0
        for i in range(n):
            fi = _f_total(lkind, lp, x[i])
            fcur[i] = fi
            if fi < minf0[i]:
                minf0[i] = fi
            if fi < minf1[i]:
                minf1[i] = fi
            ax = abs(x[i])
            if ax > maxabs:
                maxabs = ax
        if have_oracle and k >= tail_start:
            xb = 0.0
            for i in range(n):
                xb += x[i]
            xb /= n
            a = min(max(xb, oracle_lo), oracle_hi)
            dd = 0.0
            for i in range(n):
                dx = x[i] - a
                dd += dx * dx
            dd = math.sqrt(dd)
            if not (dd <= max_d_tail):
                max_d_tail = dd
        if not (maxabs <= OVERFLOW_LIMIT):
            abort_k = np.int64(k)
            abort_rho = rho
            break
        if ri < R and k == rec_ks[ri]:
            for i in range(n):
                states[ri, i] = x[i]
                fnrec[ri, i] = fcur[i]
                m0rec[ri, i] = minf0[i]
                m1rec[ri, i] = minf1[i]
            vrec[ri] = x.max() - x.min()
            xb = 0.0
            for i in range(n):
                xb += x[i]
            xb /= n
            xbrec[ri] = xb
            if have_oracle:
                a = min(max(xb, oracle_lo), oracle_hi)
                dd = 0.0
                for i in range(n):
                    dx = x[i] - a
                    dd += dx * dx
                drec[ri] = math.sqrt(dd)
            ri += 1

    return (states, vrec, xbrec, drec, fnrec, m0rec, m1rec,
            max_d_tail, abort_k, abort_rho)


@njit(cache=True)
def _grid_value(eu, ev, ew, lkind, lp, lam, x):
    g = 0.0
    for i in range(x.shape[0]):
        g += _f_local(lkind[i], lp[i, 0], lp[i, 1], lp[i, 2], x[i])
    h = 0.0
    for e in range(eu.shape[0]):
        h += ew[e] * abs(x[eu[e]] - x[ev[e]])
    return g + lam * h


@njit(cache=True)
def grid_scan(eu, ev, ew, lkind, lp, lam, lo, step, npts, near_tol):
    n = lkind.shape[0]
    total = 1
    for _ in range(n):
        total *= npts
    x = np.full(n, lo)
    idx = np.zeros(n, np.int64)

    minval = np.inf
    for _ in range(total):
        val = _grid_value(eu, ev, ew, lkind, lp, lam, x)
        if val < minval:
            minval = val
        d = n - 1
        while d >= 0:
            idx[d] += 1
            if idx[d] < npts:
                x[d] = lo + idx[d] * step
                break
            idx[d] = 0
            x[d] = lo
            d -= 1

    thresh = minval + near_tol
    near_count = 0
    near_max_spread = 0.0
    near_mean_lo = np.inf
    near_mean_hi = -np.inf
    for d in range(n):
        idx[d] = 0
        x[d] = lo
    for _ in range(total):
        val = _grid_value(eu, ev, ew, lkind, lp, lam, x)
        if val <= thresh:
            near_count += 1
            sp = x.max() - x.min()
            if sp > near_max_spread:
                near_max_spread = sp
            mu = 0.0
            for d in range(n):
                mu += x[d]
            mu /= n
            if mu < near_mean_lo:
                near_mean_lo = mu
            if mu > near_mean_hi:
                near_mean_hi = mu
        d = n - 1
        while d >= 0:
            idx[d] += 1
            if idx[d] < npts:
                x[d] = lo + idx[d] * step
                break
            idx[d] = 0
            x[d] = lo
            d -= 1

    return minval, near_count, near_max_spread, near_mean_lo, near_mean_hi


@njit(cache=True)
def uniform_pairs_flat(seed, ks, ii, jj, stream):
    out = np.empty(ks.shape[0])
    for t in range(ks.shape[0]):
        c = _counter(ks[t], ii[t], jj[t])
        out[t] = _u01(seed, c, np.uint64(stream))
    return out


@njit(cache=True)
def normal_pairs_flat(seed, ks, ii, jj):
    out = np.empty(ks.shape[0])
    for t in range(ks.shape[0]):
        c = _counter(ks[t], ii[t], jj[t])
        out[t] = _normal(seed, c)
    return out
