"""Local convex objectives, the disagreement penalty, and the penalty
factor calculus.

Sign convention: ``sgn(0) = 0`` everywhere (three-valued sign).  At kink
points each family's subgradient selection follows its piecewise
definition's ``>=`` branch; the absolute-deviation family returns 0 at
its kink (the symmetric valid choice).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import WeightedGraph, edge_connectivity, smallest_weights_sum


class ObjectiveError(ValueError):
    """Invalid objective construction or unsupported operation."""


# kernel family codes
KIND_ABS = 0
KIND_QUANTILE = 1
KIND_QUADRATIC = 2


@dataclass(frozen=True)
class AbsDeviation:
    """f(x) = |x - s|."""

    s: float

    kind = KIND_ABS

    def value(self, x):
        return np.abs(x - self.s)

    def subgrad(self, x):
        return np.sign(np.asarray(x, dtype=float) - self.s)

    def params(self):
        return (self.s, 0.0, 0.0)

    def bound(self) -> float:
        return 1.0

    def representative_minimizer(self) -> float:
        return self.s

    def breakpoints(self):
        return (self.s,)


@dataclass(frozen=True)
class Quantile:
    """Quantile (pinball) loss of the residual: f(x) = Q_alpha(y - x*s).

    Q_alpha(u) is alpha*u for u >= 0 and (alpha-1)*u for u < 0; the
    subgradient takes the u >= 0 branch at the kink.
    """

    alpha: float
    y: float
    s: float

    kind = KIND_QUANTILE

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ObjectiveError(f"alpha must be in [0,1], got {self.alpha}")

    def value(self, x):
        u = self.y - np.asarray(x, dtype=float) * self.s
        return np.where(u >= 0.0, self.alpha * u, (self.alpha - 1.0) * u)

    def subgrad(self, x):
        u = self.y - np.asarray(x, dtype=float) * self.s
        return np.where(u >= 0.0, -self.alpha * self.s, (1.0 - self.alpha) * self.s)

    def params(self):
        return (self.alpha, self.y, self.s)

    def bound(self) -> float:
        return max(self.alpha * abs(self.s), (1.0 - self.alpha) * abs(self.s))

    def representative_minimizer(self) -> float:
        return self.y / self.s if self.s != 0.0 else 0.0

    def breakpoints(self):
        return (self.y / self.s,) if self.s != 0.0 else ()


@dataclass(frozen=True)
class Quadratic:
    """f(x) = a*(x - b)^2 with a >= 0."""

    a: float
    b: float

    kind = KIND_QUADRATIC

    def __post_init__(self):
        if self.a < 0.0:
            raise ObjectiveError(f"quadratic coefficient must be >= 0, got {self.a}")

    def value(self, x):
        dx = np.asarray(x, dtype=float) - self.b
        return self.a * dx * dx

    def subgrad(self, x):
        return 2.0 * self.a * (np.asarray(x, dtype=float) - self.b)

    def params(self):
        return (self.a, self.b, 0.0)

    def bound(self):
        return None

    def representative_minimizer(self) -> float:
        return self.b

    def breakpoints(self):
        return ()


LocalObjective = AbsDeviation | Quantile | Quadratic


def locals_arrays(locs):
    """Family-code and parameter arrays for the kernels."""
    lkind = np.array([lo.kind for lo in locs], dtype=np.int64)
    lp = np.array([lo.params() for lo in locs], dtype=np.float64)
    return lkind, lp


def total_objective(locs, x):
    """f(x) = sum_i f_i(x) for scalar or array x."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for lo in locs:
        out = out + lo.value(x)
    return out


def total_subgradient(locs, x):
    """One subgradient of sum_i f_i at x (family kink selections)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for lo in locs:
        out = out + lo.subgrad(x)
    return out


@dataclass(frozen=True)
class ProblemInstance:
    """Graph, one local objective per node, and the penalty factor."""

    graph: WeightedGraph
    locals: tuple
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "locals", tuple(self.locals))
        if len(self.locals) != self.graph.n:
            raise ObjectiveError(
                f"{len(self.locals)} locals for {self.graph.n} nodes"
            )
        if not (self.lam > 0.0):
            raise ObjectiveError(f"penalty factor must be > 0, got {self.lam}")

    def with_lam(self, lam: float) -> "ProblemInstance":
        return ProblemInstance(self.graph, self.locals, lam)


@dataclass(frozen=True)
class OptimalSet:
    """Closed interval of optimal consensus values and the optimal value."""

    lo: float
    hi: float
    f_star: float

    def distance(self, x) -> float:
        """min over x* in the set of ||x - x* 1|| (consensus embedding)."""
        x = np.asarray(x, dtype=float)
        a = min(max(float(x.mean()), self.lo), self.hi)
        return float(np.linalg.norm(x - a))

    def point_distance(self, t: float) -> float:
        """Scalar distance from t to the interval."""
        if t < self.lo:
            return self.lo - t
        if t > self.hi:
            return t - self.hi
        return 0.0


def disagreement_penalty(g: WeightedGraph, x) -> float:
    """Weighted total state disagreement: sum over edges of w*|x_i - x_j|."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise ObjectiveError(f"state has shape {x.shape}, expected ({g.n},)")
    total = 0.0
    for i, j, w in g.edges:
        total += w * abs(x[i] - x[j])
    return total


def penalized_objective(p: ProblemInstance, x) -> float:
    """g(x) + lam * h(x): node-local costs plus weighted disagreement."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.graph.n,):
        raise ObjectiveError(f"state has shape {x.shape}, expected ({p.graph.n},)")
    g = sum(float(lo.value(x[i])) for i, lo in enumerate(p.locals))
    return g + p.lam * disagreement_penalty(p.graph, x)


def penalized_subgradient(p: ProblemInstance, x) -> np.ndarray:
    """Subgradient of the penalized objective, component i being
    lam * sum_j a_ij * sgn(x_i - x_j) + (own local subgradient at x_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.graph.n,):
        raise ObjectiveError(f"state has shape {x.shape}, expected ({p.graph.n},)")
    A = p.graph.adjacency()
    S = np.sign(x[:, None] - x[None, :])
    grads = np.array([float(lo.subgrad(x[i])) for i, lo in enumerate(p.locals)])
    return p.lam * (A * S).sum(axis=1) + grads


def uniform_subgradient_bound(locs) -> float:
    """Tightest uniform bound c with |grad f_i(x)| <= c for all i, x."""
    bounds = []
    for lo in locs:
        b = lo.bound()
        if b is None:
            raise ObjectiveError(
                "unbounded subgradient family present; use minimizer_subgradient_bound"
            )
        bounds.append(b)
    return float(max(bounds))


def penalty_lower_bound(p: ProblemInstance) -> float:
    """Critical penalty factor n*c / (2 * smallest_weights_sum(g, l)).

    Any lam strictly above this value makes the penalized problem share
    the original problem's optimal value and consensus solutions.
    """
    l = edge_connectivity(p.graph)
    if l < 1:
        raise ObjectiveError("graph is disconnected; no finite penalty factor works")
    c = uniform_subgradient_bound(p.locals)
    return p.graph.n * c / (2.0 * smallest_weights_sum(p.graph, l))


def minimizer_subgradient_bound(locs) -> float:
    """min over i of max over j of |grad f_i| at f_j's minimizer.

    Practical upper estimate of the critical subgradient scale for
    families without a uniform bound (e.g. quadratics).
    """
    reps = []
    for lo in locs:
        r = lo.representative_minimizer()
        if not np.isfinite(r):
            raise ObjectiveError("a local objective has no finite minimizer")
        reps.append(r)
    reps = np.array(reps)
    per_i = [float(np.max(np.abs(lo.subgrad(reps)))) for lo in locs]
    return float(min(per_i))


def optimal_set(locs) -> OptimalSet:
    """Brute-force optimal set of sum_i f_i for the builtin families.

    Piecewise-linear families are solved by slope sign change over the
    sorted kinks; all-quadratic instances in closed form.  Mixing the
    two classes is not supported.
    """
    locs = tuple(locs)
    if not locs:
        raise ObjectiveError("no local objectives")
    has_quad = any(lo.kind == KIND_QUADRATIC for lo in locs)
    has_pl = any(lo.kind != KIND_QUADRATIC for lo in locs)
    if has_quad and has_pl:
        raise ObjectiveError("mixed quadratic and piecewise-linear locals unsupported")
    if has_quad:
        a = np.array([lo.a for lo in locs])
        b = np.array([lo.b for lo in locs])
        if a.sum() <= 0.0:
            raise ObjectiveError("all quadratic coefficients are zero")
        xs = float((a * b).sum() / a.sum())
        return OptimalSet(xs, xs, float(total_objective(locs, xs)))

    bps = sorted({bp for lo in locs for bp in lo.breakpoints()})
    if not bps:
        raise ObjectiveError("objective is constant; optimal set unbounded")
    bps = np.array(bps)
    # slope on each open segment, sampled at interior points
    probes = np.concatenate([[bps[0] - 1.0], (bps[:-1] + bps[1:]) / 2.0, [bps[-1] + 1.0]])
    slopes = total_subgradient(locs, probes)
    scale = sum(lo.bound() for lo in locs)
    tol = 1e-12 * max(1.0, scale)
    zero = np.abs(slopes) <= tol
    if zero.any():
        first = int(np.argmax(zero))
        last = len(zero) - 1 - int(np.argmax(zero[::-1]))
        if first == 0 or last == len(zero) - 1:
            raise ObjectiveError("objective is flat at infinity; optimal set unbounded")
        lo_x, hi_x = float(bps[first - 1]), float(bps[last])
    else:
        t = int(np.argmax(slopes > 0.0))
        if slopes[t] <= 0.0 or t == 0:
            raise ObjectiveError("no interior slope sign change; optimal set unbounded")
        lo_x = hi_x = float(bps[t - 1])
    return OptimalSet(lo_x, hi_x, float(total_objective(locs, lo_x)))


def quadratic_envelope_constants(locs):
    """Constants (c, alpha) with |grad f_i(x)|^2 <= c^2/2 * (alpha + dist(x)^2)
    for an all-quadratic family, dist being the distance to the optimal set.

    Derivation: with x* the common optimum, (x-b_i)^2 <= 2(x-x*)^2 +
    2(x*-b_i)^2, so |2a_i(x-b_i)|^2 <= 8 a_max^2 (dist^2 + max_i(x*-b_i)^2),
    which matches c = 4*a_max, alpha = max_i (x* - b_i)^2.
    """
    if any(lo.kind != KIND_QUADRATIC for lo in locs):
        raise ObjectiveError("quadratic envelope constants need all-quadratic locals")
    star = optimal_set(locs)
    a_max = max(lo.a for lo in locs)
    alpha = max((star.lo - lo.b) ** 2 for lo in locs)
    return 4.0 * a_max, float(alpha)


@dataclass(frozen=True)
class GridCertificate:
    """Result of an exhaustive grid scan of the penalized objective."""

    min_value: float
    near_count: int
    near_max_spread: float
    near_mean_lo: float
    near_mean_hi: float
    step: float
    near_tol: float


def grid_certify(p: ProblemInstance, lo: float, hi: float, step: float,
                 near_tol: float = 1e-9) -> GridCertificate:
    """Scan the penalized objective over the uniform grid [lo, hi]^n.

    Returns the grid minimum plus summary statistics of all points
    within near_tol of it (count, worst spread, range of their means).
    """
    npts = int(round((hi - lo) / step)) + 1
    if npts < 2:
        raise ObjectiveError("grid needs at least 2 points per dimension")
    eu, ev, ew = p.graph.edge_arrays()
    lkind, lp = locals_arrays(p.locals)
    minval, cnt, spread, mlo, mhi = kernels.grid_scan(
        eu, ev, ew, lkind, lp, p.lam, lo, step, npts, near_tol
    )
    return GridCertificate(minval, cnt, spread, mlo, mhi, step, near_tol)
