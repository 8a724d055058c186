"""Weighted undirected graphs and the connectivity quantities used by
the convergence bounds.

A :class:`WeightedGraph` is immutable after construction and safe to
share; every operation here is a pure function of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections import deque

import numpy as np

from .kernels import _rng


class GraphError(ValueError):
    """Invalid graph construction or parameter."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights.

    Nodes are labeled ``0..n-1``.  Edges are stored as ``(i, j, w)``
    with ``i < j``; duplicates and self-loops are rejected.
    """

    n: int
    edges: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("node count must be >= 1")
        if self.n > _rng.MAX_NODES:
            raise GraphError(f"node count must be <= {_rng.MAX_NODES}")
        seen = set()
        norm = []
        for edge in self.edges:
            i, j, w = int(edge[0]), int(edge[1]), float(edge[2])
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i},{j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i},{j})")
            if not (w > 0.0) or not np.isfinite(w):
                raise GraphError(f"edge ({i},{j}) weight must be positive, got {w}")
            seen.add((i, j))
            norm.append((i, j, w))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_arrays(self):
        """Edge list as (sources, sinks, weights) numpy arrays."""
        if not self.edges:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))
        eu = np.array([e[0] for e in self.edges], dtype=np.int64)
        ev = np.array([e[1] for e in self.edges], dtype=np.int64)
        ew = np.array([e[2] for e in self.edges], dtype=np.float64)
        return eu, ev, ew

    def adjacency(self) -> np.ndarray:
        """Symmetric weighted adjacency matrix with zero diagonal."""
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = w
            A[j, i] = w
        return A

    def neighbors(self, i: int):
        return sorted(
            {j for u, v, _ in self.edges for j in ((v,) if u == i else (u,) if v == i else ())}
        )

    def reweighted(self, weights) -> "WeightedGraph":
        """Same topology with new per-edge weights (edge-list order)."""
        weights = list(weights)
        if len(weights) != self.m:
            raise GraphError("weight list length must match edge count")
        return WeightedGraph(
            self.n, tuple((i, j, float(w)) for (i, j, _), w in zip(self.edges, weights))
        )


@dataclass(frozen=True)
class IncidenceMatrix:
    """Node-by-edge orientation matrix.

    Column e has +1 at the source and -1 at the sink, so
    ``(B.T @ x)[e] == x[source] - x[sink]``.
    """

    B: np.ndarray
    orientation: tuple  # per-edge (source, sink)


def incidence(g: WeightedGraph) -> IncidenceMatrix:
    """Incidence matrix with the deterministic low-index-source orientation."""
    B = np.zeros((g.n, g.m))
    orient = []
    for e, (i, j, _) in enumerate(g.edges):
        B[i, e] = 1.0
        B[j, e] = -1.0
        orient.append((i, j))
    return IncidenceMatrix(B, tuple(orient))


def max_weighted_degree(g: WeightedGraph) -> float:
    """Maximum over nodes of the sum of incident edge weights."""
    deg = np.zeros(g.n)
    for i, j, w in g.edges:
        deg[i] += w
        deg[j] += w
    return float(deg.max()) if g.n else 0.0


def smallest_weights_sum(g: WeightedGraph, l: int) -> float:
    """Sum of the l smallest edge weights."""
    if not (1 <= l <= g.m):
        raise GraphError(f"l={l} out of range 1..{g.m}")
    ws = sorted(w for _, _, w in g.edges)
    return float(sum(ws[:l]))


def _unit_max_flow(adj, caps, s, t, best) -> int:
    """Edge-disjoint s-t path count by BFS augmentation, capped at best."""
    n = len(adj)
    flow = 0
    while flow < best:
        parent = [-1] * n
        parent[s] = s
        q = deque([s])
        while q and parent[t] == -1:
            u = q.popleft()
            for v in adj[u]:
                if parent[v] == -1 and caps[u][v] > 0:
                    parent[v] = u
                    q.append(v)
        if parent[t] == -1:
            break
        v = t
        while v != s:
            u = parent[v]
            caps[u][v] -= 1
            caps[v][u] += 1
            v = u
        flow += 1
    return flow


def edge_connectivity(g: WeightedGraph) -> int:
    """Global edge connectivity, ignoring weights.

    Minimum number of edge removals that disconnects the graph; 0 if it
    is already disconnected.  A single-node graph returns n as an
    "infinite" sentinel.  Computed as the minimum unit-capacity max-flow
    from node 0 to every other node (Menger).
    """
    n = g.n
    if n == 1:
        return n
    adj = [[] for _ in range(n)]
    for i, j, _ in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    best = min(len(a) for a in adj)  # cut around the min-degree node
    if best == 0:
        return 0
    for t in range(1, n):
        caps = [dict() for _ in range(n)]
        for i, j, _ in g.edges:
            caps[i][j] = 1
            caps[j][i] = 1
        best = min(best, _unit_max_flow(adj, caps, 0, t, best))
        if best == 0:
            return 0
    return best


def max_flow_between(g: WeightedGraph, s: int, t: int) -> int:
    """Number of pairwise edge-disjoint s-t paths (unit capacities)."""
    if s == t:
        raise GraphError("source and sink must differ")
    adj = [[] for _ in range(g.n)]
    caps = [dict() for _ in range(g.n)]
    for i, j, _ in g.edges:
        adj[i].append(j)
        adj[j].append(i)
        caps[i][j] = 1
        caps[j][i] = 1
    return _unit_max_flow(adj, caps, s, t, g.m + 1)


def is_connected(g: WeightedGraph) -> bool:
    if g.n == 1:
        return True
    adj = [[] for _ in range(g.n)]
    for i, j, _ in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    q = deque([0])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                q.append(v)
    return len(seen) == g.n


def ring(n: int, weight: float = 1.0) -> WeightedGraph:
    """Cycle graph 0-1-...-(n-1)-0 with a common edge weight."""
    if n < 3:
        raise GraphError("ring needs n >= 3")
    edges = [(i, i + 1, weight) for i in range(n - 1)] + [(0, n - 1, weight)]
    return WeightedGraph(n, tuple(edges))


def ring_random_weights(n: int, seed: int) -> WeightedGraph:
    """Ring with per-edge weights drawn uniformly from (0, 1]."""
    base = ring(n, 1.0)
    ws = _rng.uniform_pairs(
        seed, 0, np.arange(base.m), np.zeros(base.m, np.int64), _rng.STREAM_WEIGHTS
    )
    return base.reweighted(ws)


def complete(n: int, weight: float = 1.0) -> WeightedGraph:
    """Complete graph on n nodes."""
    edges = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
    return WeightedGraph(n, tuple(edges))
