"""Iteration engines.

Four update rules share one driver: the sign-exchange iteration on a
static graph, its noisy-sign variant, the randomly-activated-graph
variant (unit weights on active edges), and the classical linear
relative-state baseline.  Updates are synchronous: every node computes
its step from the same state snapshot.

Stepsize indexing: power-law schedules are indexed from 1 (k^-alpha is
undefined at 0); affine-reciprocal schedules a/(k+b) are indexed from 0
unless b == 0, in which case they start at 1; constants are constant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import WeightedGraph, max_weighted_degree
from .objective import (
    ObjectiveError,
    ProblemInstance,
    locals_arrays,
    optimal_set,
)
from .stochastic import ActivationMatrix, NoiseModel, sample_activation, sample_noise
from .kernels import _rng


class AlgorithmError(ValueError):
    """Invalid run configuration."""


class SimulationDiverged(RuntimeError):
    """State blew past the overflow guard; the configuration is bad."""

    def __init__(self, k: int, rho: float):
        self.k = k
        self.rho = rho
        super().__init__(
            f"state exceeded {kernels.OVERFLOW_LIMIT:g} at step {k} (stepsize {rho:g}); "
            "check schedule and penalty factor"
        )


@dataclass(frozen=True)
class PowerLaw:
    """rho_k = k^(-alpha) for k = 1, 2, ...; alpha in [0.5, 1]."""

    alpha: float

    kind = 0

    def __post_init__(self):
        if not (0.5 <= self.alpha <= 1.0):
            raise AlgorithmError(f"power-law exponent must be in [0.5, 1], got {self.alpha}")

    def params(self):
        return (self.alpha, 0.0)

    def rho_at(self, k: int) -> float:
        return float(k) ** (-self.alpha)


@dataclass(frozen=True)
class Constant:
    """rho_k = rho."""

    rho: float

    kind = 1

    def __post_init__(self):
        if not (self.rho > 0.0):
            raise AlgorithmError(f"constant stepsize must be > 0, got {self.rho}")

    def params(self):
        return (self.rho, 0.0)

    def rho_at(self, k: int) -> float:
        return self.rho


@dataclass(frozen=True)
class AffineReciprocal:
    """rho_k = a/(k+b) indexed from 0, or a/k from 1 when b == 0."""

    a: float
    b: float

    kind = 2

    def __post_init__(self):
        if not (self.a > 0.0) or self.b < 0.0:
            raise AlgorithmError(f"affine schedule needs a > 0 and b >= 0, got ({self.a}, {self.b})")

    def params(self):
        return (self.a, self.b)

    def rho_at(self, k: int) -> float:
        if self.b > 0.0:
            return self.a / ((k - 1) + self.b)
        return self.a / k


StepSchedule = PowerLaw | Constant | AffineReciprocal

ALGORITHMS = ("algo1", "algo2", "algo3", "dgd")
_ALGO_CODE = {"algo1": 0, "algo2": 1, "algo3": 2, "dgd": 3}


def _own_subgrads(p: ProblemInstance, x: np.ndarray) -> np.ndarray:
    return np.array([float(lo.subgrad(x[i])) for i, lo in enumerate(p.locals)])


def _edge_accumulate(n, idx, vals):
    acc = np.zeros(n)
    np.add.at(acc, idx, vals)
    return acc


def step_algo1(p: ProblemInstance, x, rho: float) -> np.ndarray:
    """One sign-exchange update: x_i + lam*rho*sum_j a_ij*sgn(x_j - x_i)
    - rho * (own subgradient)."""
    x = np.asarray(x, dtype=float)
    eu, ev, ew = p.graph.edge_arrays()
    su = np.sign(x[ev] - x[eu])
    sv = np.sign(x[eu] - x[ev])
    acc = _edge_accumulate(p.graph.n, np.concatenate([eu, ev]),
                           np.concatenate([ew * su, ew * sv]))
    return (x + (p.lam * rho) * acc) - rho * _own_subgrads(p, x)


def step_algo2(p: ProblemInstance, noise: NoiseModel, k: int, x, rho: float) -> np.ndarray:
    """Sign-exchange update with each relative state perturbed by the
    step-k noise draw for its ordered pair."""
    x = np.asarray(x, dtype=float)
    eu, ev, ew = p.graph.edge_arrays()
    E = sample_noise(noise, k)
    su = np.sign((x[ev] - x[eu]) + E[eu, ev])
    sv = np.sign((x[eu] - x[ev]) + E[ev, eu])
    acc = _edge_accumulate(p.graph.n, np.concatenate([eu, ev]),
                           np.concatenate([ew * su, ew * sv]))
    return (x + (p.lam * rho) * acc) - rho * _own_subgrads(p, x)


def step_algo3(p: ProblemInstance, act: ActivationMatrix, k: int, x, rho: float) -> np.ndarray:
    """Sign-exchange update over the step-k active edge set, with unit
    weights on active edges."""
    x = np.asarray(x, dtype=float)
    eu, ev, _ = act.graph.edge_arrays()
    M = sample_activation(act, k)
    on = M[eu, ev]
    su = np.sign(x[ev] - x[eu])
    sv = np.sign(x[eu] - x[ev])
    acc = _edge_accumulate(p.graph.n, np.concatenate([eu[on], ev[on]]),
                           np.concatenate([su[on], sv[on]]))
    return (x + (p.lam * rho) * acc) - rho * _own_subgrads(p, x)


def step_dgd(p: ProblemInstance, x, rho: float) -> np.ndarray:
    """Classical linear baseline: x_i + sum_j a_ij*(x_j - x_i) - rho*grad."""
    if max_weighted_degree(p.graph) > 1.0:
        warnings.warn(
            "weighted degree exceeds 1; the linear baseline may diverge",
            stacklevel=2,
        )
    x = np.asarray(x, dtype=float)
    eu, ev, ew = p.graph.edge_arrays()
    acc = _edge_accumulate(p.graph.n, np.concatenate([eu, ev]),
                           np.concatenate([ew * (x[ev] - x[eu]), ew * (x[eu] - x[ev])]))
    return (x + acc) - rho * _own_subgrads(p, x)


@dataclass
class RunRecord:
    """Trajectory snapshots plus per-step-exact running metrics.

    States and metrics are recorded every `record_stride` steps and at
    the final step.  The per-node running minima of the full objective
    are maintained at every step regardless of stride: `minf0` over all
    states including the initial one, `minf1` over updated states only.
    """

    algorithm: str
    lam: float
    seed: int | None
    schedule: StepSchedule
    steps: int
    record_stride: int
    rec_ks: np.ndarray
    states: np.ndarray
    v: np.ndarray
    xbar: np.ndarray
    d: np.ndarray
    f_nodes: np.ndarray
    minf0: np.ndarray
    minf1: np.ndarray
    max_d_tail: float
    tail_start: int
    oracle: object | None
    config: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def terminal_state(self) -> np.ndarray:
        return self.states[-1]

    def terminal_v(self) -> float:
        return float(self.v[-1])

    def has_full_trajectory(self) -> bool:
        return self.record_stride == 1


def record_indices(K: int, stride: int) -> np.ndarray:
    ks = np.arange(0, K + 1, stride, dtype=np.int64)
    if ks[-1] != K:
        ks = np.append(ks, np.int64(K))
    return ks


def run(p: ProblemInstance, algorithm: str, schedule: StepSchedule, x0,
        K: int, record_stride: int = 1, noise: NoiseModel | None = None,
        activation: ActivationMatrix | None = None,
        config: dict | None = None) -> RunRecord:
    """Iterate updates k = 1..K and collect a RunRecord.

    Deterministic given (x0, schedule, seeds): rerunning an identical
    configuration reproduces the trajectory bit for bit.
    """
    if algorithm not in ALGORITHMS:
        raise AlgorithmError(f"unknown algorithm {algorithm!r}")
    if K < 1:
        raise AlgorithmError(f"need at least one step, got K={K}")
    if record_stride < 1:
        raise AlgorithmError("record_stride must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (p.graph.n,):
        raise AlgorithmError(f"x0 has shape {x0.shape}, expected ({p.graph.n},)")

    g = p.graph
    eu, ev, ew = g.edge_arrays()
    pe = np.zeros(g.m)
    sig = np.zeros(g.m)
    seed = 0
    topo = tuple((i, j) for i, j, _ in g.edges)
    if algorithm == "algo2":
        if noise is None:
            raise AlgorithmError("algo2 needs a NoiseModel")
        if tuple((i, j) for i, j, _ in noise.graph.edges) != topo:
            raise AlgorithmError("noise model edges do not match the problem graph")
        sig = np.asarray(noise.sigma_edges)
        seed = noise.seed
    elif algorithm == "algo3":
        if activation is None:
            raise AlgorithmError("algo3 needs an ActivationMatrix")
        if tuple((i, j) for i, j, _ in activation.graph.edges) != topo:
            raise AlgorithmError("activation edges do not match the problem graph")
        pe = np.asarray(activation.p_edges)
        seed = activation.seed
    elif algorithm == "dgd" and max_weighted_degree(g) > 1.0:
        warnings.warn(
            "weighted degree exceeds 1; the linear baseline may diverge",
            stacklevel=2,
        )

    try:
        star = optimal_set(p.locals)
        olo, ohi = star.lo, star.hi
    except ObjectiveError:
        star = None
        olo = ohi = np.nan

    lkind, lp = locals_arrays(p.locals)
    rec_ks = record_indices(K, record_stride)
    tail_start = K - K // 10 + 1
    skind = schedule.kind
    s1, s2 = schedule.params()

    (states, v, xbar, d, fnodes, minf0, minf1,
     max_d_tail, abort_k, abort_rho) = kernels.run_sim(
        _ALGO_CODE[algorithm], x0, eu, ev, ew, pe, sig, lkind, lp, p.lam,
        seed, skind, s1, s2, K, rec_ks, olo, ohi, tail_start,
    )
    if abort_k >= 0:
        raise SimulationDiverged(int(abort_k), float(abort_rho))

    return RunRecord(
        algorithm=algorithm,
        lam=p.lam,
        seed=(seed if algorithm in ("algo2", "algo3") else None),
        schedule=schedule,
        steps=K,
        record_stride=record_stride,
        rec_ks=rec_ks,
        states=states,
        v=v,
        xbar=xbar,
        d=d,
        f_nodes=fnodes,
        minf0=minf0,
        minf1=minf1,
        max_d_tail=float(max_d_tail),
        tail_start=tail_start,
        oracle=star,
        config=dict(config or {}),
    )
