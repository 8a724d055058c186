"""Seeded randomness: Gaussian sign perturbations, Bernoulli edge
activation, and the folded-normal mean.

All draws are keyed on (seed, step, i, j) through the counter-based
hash in :mod:`signopt.kernels`, so realizations are reproducible and
independent of evaluation order.  Noise draws are independent per
ordered pair (i, j); activation draws are shared per unordered pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import WeightedGraph
from .kernels import _rng

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class StochasticError(ValueError):
    """Invalid noise or activation configuration."""


@dataclass(frozen=True)
class NoiseModel:
    """Per-edge Gaussian noise levels plus the draw seed."""

    graph: WeightedGraph
    sigma_edges: tuple  # aligned with graph.edges
    seed: int

    def __post_init__(self):
        sig = tuple(float(s) for s in self.sigma_edges)
        if len(sig) != self.graph.m:
            raise StochasticError(
                f"{len(sig)} sigma values for {self.graph.m} edges"
            )
        if any(s < 0.0 or not np.isfinite(s) for s in sig):
            raise StochasticError("noise standard deviations must be >= 0")
        object.__setattr__(self, "sigma_edges", sig)

    @classmethod
    def uniform(cls, graph: WeightedGraph, sigma: float, seed: int) -> "NoiseModel":
        return cls(graph, (float(sigma),) * graph.m, seed)

    def sigma_matrix(self) -> np.ndarray:
        S = np.zeros((self.graph.n, self.graph.n))
        for (i, j, _), s in zip(self.graph.edges, self.sigma_edges):
            S[i, j] = s
            S[j, i] = s
        return S

    def sigma_sum(self) -> float:
        """Half the ordered-pair sum of a_ij * sigma_ij (one term per edge)."""
        return float(sum(w * s for (_, _, w), s in zip(self.graph.edges, self.sigma_edges)))


def sample_noise(model: NoiseModel, k: int) -> np.ndarray:
    """Step-k noise realization as an n-by-n array over ordered edge pairs.

    Entry (i, j) is the draw node i makes about neighbor j; (i, j) and
    (j, i) are independent.  Off-edge entries are zero.
    """
    g = model.graph
    E = np.zeros((g.n, g.n))
    if g.m == 0:
        return E
    eu, ev, _ = g.edge_arrays()
    sig = np.asarray(model.sigma_edges)
    ii = np.concatenate([eu, ev])
    jj = np.concatenate([ev, eu])
    z = kernels.normal_pairs(model.seed, k, ii, jj)
    draws = np.concatenate([sig, sig]) * z
    E[ii, jj] = draws
    return E


@dataclass(frozen=True)
class ActivationMatrix:
    """Independent per-edge activation probabilities plus the draw seed.

    The mean graph reuses the probabilities as edge weights; edges with
    probability zero never activate and drop out of the mean graph.
    """

    graph: WeightedGraph
    p_edges: tuple  # aligned with graph.edges
    seed: int

    def __post_init__(self):
        ps = tuple(float(p) for p in self.p_edges)
        if len(ps) != self.graph.m:
            raise StochasticError(f"{len(ps)} probabilities for {self.graph.m} edges")
        if any(p < 0.0 or p > 1.0 or not np.isfinite(p) for p in ps):
            raise StochasticError("activation probabilities must be in [0, 1]")
        object.__setattr__(self, "p_edges", ps)

    @classmethod
    def from_weights(cls, graph: WeightedGraph, seed: int) -> "ActivationMatrix":
        ws = [w for _, _, w in graph.edges]
        if any(w > 1.0 for w in ws):
            raise StochasticError("edge weights exceed 1; not usable as probabilities")
        return cls(graph, tuple(ws), seed)

    def probability_matrix(self) -> np.ndarray:
        P = np.zeros((self.graph.n, self.graph.n))
        for (i, j, _), p in zip(self.graph.edges, self.p_edges):
            P[i, j] = p
            P[j, i] = p
        return P

    def mean_graph(self) -> WeightedGraph:
        edges = [
            (i, j, p)
            for (i, j, _), p in zip(self.graph.edges, self.p_edges)
            if p > 0.0
        ]
        return WeightedGraph(self.graph.n, tuple(edges))


def sample_activation(act: ActivationMatrix, k: int) -> np.ndarray:
    """Step-k active-edge indicator as a symmetric boolean n-by-n array."""
    g = act.graph
    M = np.zeros((g.n, g.n), dtype=bool)
    if g.m == 0:
        return M
    eu, ev, _ = g.edge_arrays()
    u = kernels.uniform_pairs(act.seed, k, eu, ev, _rng.STREAM_ACTIVATION)
    on = u <= np.asarray(act.p_edges)
    M[eu[on], ev[on]] = True
    M[ev[on], eu[on]] = True
    return M


def normal_cdf(t: float) -> float:
    """Standard normal CDF via the C library erf (abs error < 1e-15)."""
    return 0.5 * (1.0 + math.erf(t / math.sqrt(2.0)))


def folded_normal_mean(mu: float, sigma: float) -> float:
    """E|X| for X ~ N(mu, sigma^2); |mu| in the degenerate sigma = 0 case."""
    if sigma < 0.0:
        raise StochasticError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return abs(mu)
    r = mu / sigma
    return mu * (1.0 - 2.0 * normal_cdf(-r)) + sigma * SQRT_2_OVER_PI * math.exp(
        -0.5 * r * r
    )


def normal_variates(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """`count` reproducible standard normal draws (stream index = draw index)."""
    ks = np.arange(offset, offset + count, dtype=np.uint64)
    return np.asarray(kernels.normal_pairs(seed, ks, 0, 1))


def uniform_variates(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """`count` reproducible uniform (0, 1] draws."""
    ks = np.arange(offset, offset + count, dtype=np.uint64)
    return np.asarray(kernels.uniform_pairs(seed, ks, 0, 1, _rng.STREAM_ACTIVATION))
