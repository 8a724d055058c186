"""Closed-form bound evaluators and post-hoc verification of runs.

Each evaluator returns the right-hand side of one convergence guarantee
for a configured problem instance; :func:`verify_run` compares them
against the metrics of a recorded trajectory and reports signed
margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algorithms import Constant, PowerLaw, RunRecord, StepSchedule
from .graph import edge_connectivity, max_weighted_degree, smallest_weights_sum
from .objective import (
    ObjectiveError,
    ProblemInstance,
    penalized_subgradient,
    penalty_lower_bound,
    total_objective,
    uniform_subgradient_bound,
)
from .stochastic import NoiseModel, SQRT_2_OVER_PI

PASS_TOL = 1e-9


class AnalysisError(ValueError):
    """A bound evaluator's preconditions are not met."""


def penalized_subgrad_norm_bound(p: ProblemInstance) -> float:
    """Uniform 2-norm bound sqrt(n)*(c + lam*maxdeg) on the penalized
    subgradient, for bounded-subgradient families."""
    c = uniform_subgradient_bound(p.locals)
    return math.sqrt(p.graph.n) * (c + p.lam * max_weighted_degree(p.graph))


def growth_subgrad_norm_bound(p: ProblemInstance, c: float, alpha: float) -> float:
    """Offset term sqrt(n*alpha*c^2 + 2*lam^2*maxdeg^2) of the quadratic
    growth envelope ||grad||^2 <= cb^2 + c^2*dist^2."""
    deg = max_weighted_degree(p.graph)
    return math.sqrt(p.graph.n * alpha * c * c + 2.0 * p.lam * p.lam * deg * deg)


def diminishing_gap_bound(p: ProblemInstance, alpha: float, k: int, d0: float) -> float:
    """Objective-gap bound after k power-law steps rho_t = t^(-alpha).

    For alpha in (0.5, 1] this is ((2a-1)*d0^2 + 2a*ca^2) / (2*(2a-1)*s(k))
    with s(k) = (k^(1-a)-1)/(1-a), or ln k at a = 1.  At alpha = 0.5 the
    bound is (d0^2 + ca^2*ln k) / (4*sqrt(k)).
    """
    if not (0.5 <= alpha <= 1.0):
        raise AnalysisError(f"alpha must be in [0.5, 1], got {alpha}")
    if k < 2:
        raise AnalysisError(f"bound needs k >= 2, got {k}")
    ca = penalized_subgrad_norm_bound(p)
    if alpha == 0.5:
        return (d0 * d0 + ca * ca * math.log(k)) / (4.0 * math.sqrt(k))
    if alpha >= 1.0 - 1e-12:
        s = math.log(k)
    else:
        s = (k ** (1.0 - alpha) - 1.0) / (1.0 - alpha)
    w = 2.0 * alpha - 1.0
    return (w * d0 * d0 + 2.0 * alpha * ca * ca) / (2.0 * w * s)


def constant_gap_bound(p: ProblemInstance, rho: float, k: int, d0: float) -> float:
    """Objective-gap bound rho*ca^2/2 + d0^2/(2*rho*k) after k constant steps."""
    if k < 1:
        raise AnalysisError(f"bound needs k >= 1, got {k}")
    if rho <= 0.0:
        raise AnalysisError("stepsize must be positive")
    ca = penalized_subgrad_norm_bound(p)
    return rho * ca * ca / 2.0 + d0 * d0 / (2.0 * rho * k)


def optimal_constant_step(p: ProblemInstance, k: int, d0: float):
    """Stepsize d0/(ca*sqrt(k)) that minimizes the constant-step gap
    bound, and the resulting bound value ca*d0/sqrt(k)."""
    ca = penalized_subgrad_norm_bound(p)
    rho = d0 / (ca * math.sqrt(k))
    return rho, ca * d0 / math.sqrt(k)


def sublevel_radius(locs, extra: float, tol: float = 1e-10) -> float:
    """Largest distance from the optimal set within the sublevel set
    {x : f(x) <= f* + extra} of the scalar total objective.

    The sublevel set of a scalar convex f is an interval containing the
    optimal set; each endpoint is located by bisection.
    """
    from .objective import optimal_set

    if extra < 0.0:
        raise AnalysisError("sublevel offset must be >= 0")
    star = optimal_set(locs)
    if extra == 0.0:
        return 0.0
    target = star.f_star + extra

    def endpoint(anchor: float, direction: float) -> float:
        span = 1.0
        far = anchor + direction * span
        while float(total_objective(locs, far)) < target:
            span *= 2.0
            far = anchor + direction * span
            if span > 1e15:
                raise AnalysisError("sublevel set appears unbounded")
        near = anchor
        while abs(far - near) > tol:
            mid = 0.5 * (near + far)
            if float(total_objective(locs, mid)) <= target:
                near = mid
            else:
                far = mid
        return near

    right = endpoint(star.hi, +1.0)
    left = endpoint(star.lo, -1.0)
    return max(right - star.hi, star.lo - left, 0.0)


def _critical_denominator(p: ProblemInstance):
    l = edge_connectivity(p.graph)
    if l < 1:
        raise AnalysisError("graph is disconnected")
    a_min = smallest_weights_sum(p.graph, l)
    c = uniform_subgradient_bound(p.locals)
    denom = 2.0 * p.lam * a_min - c * p.graph.n
    return a_min, c, denom


def constant_neighborhood_bound(p: ProblemInstance, rho: float) -> float:
    """Asymptotic distance bound for constant steps:
    2*sqrt(n)*max(sublevel_radius, rho*ca^2/denom) + rho*ca."""
    _, _, denom = _critical_denominator(p)
    if denom <= 0.0:
        raise AnalysisError("penalty factor is not above the critical bound")
    ca = penalized_subgrad_norm_bound(p)
    dtil = sublevel_radius(p.locals, rho * ca * ca / 2.0)
    return 2.0 * math.sqrt(p.graph.n) * max(dtil, rho * ca * ca / denom) + rho * ca


def constant_neighborhood_bound_growth(p: ProblemInstance, rho: float,
                                       gamma: float, exponent: float) -> float:
    """Neighborhood bound when f - f* >= gamma * dist^exponent is known:
    the sublevel radius term becomes (rho*ca^2/(2*gamma))^(1/exponent)."""
    if gamma <= 0.0 or exponent < 1.0:
        raise AnalysisError("growth constants need gamma > 0 and exponent >= 1")
    _, _, denom = _critical_denominator(p)
    if denom <= 0.0:
        raise AnalysisError("penalty factor is not above the critical bound")
    ca = penalized_subgrad_norm_bound(p)
    dtil = (rho * ca * ca / (2.0 * gamma)) ** (1.0 / exponent)
    return 2.0 * math.sqrt(p.graph.n) * max(dtil, rho * ca * ca / denom) + rho * ca


def noise_spread_bound(p: ProblemInstance, noise: NoiseModel) -> float:
    """Terminal-spread bound sqrt(2/pi)*2*lam*sigma_s/denom for the
    noisy-sign iteration's limiting states."""
    _, _, denom = _critical_denominator(p)
    if denom <= 0.0:
        raise AnalysisError("penalty factor is not above the critical bound")
    return SQRT_2_OVER_PI * 2.0 * p.lam * noise.sigma_sum() / denom


def nonconsensus_grad_floor(p: ProblemInstance) -> float:
    """Uniform lower bound 2*lam*a_min/n - c on the sup-norm of the
    penalized subgradient at any non-consensus state."""
    a_min, c, _ = _critical_denominator(p)
    return 2.0 * p.lam * a_min / p.graph.n - c


def check_grad_floor(p: ProblemInstance, x) -> "BoundReport":
    """Check the non-consensus subgradient floor at one state.

    The state must not be consensus; the check is exact at states whose
    components are pairwise distinct and off the local kinks.
    """
    x = np.asarray(x, dtype=float)
    if float(x.max() - x.min()) == 0.0:
        raise AnalysisError("state is a consensus point; the floor does not apply")
    floor = nonconsensus_grad_floor(p)
    observed = float(np.abs(penalized_subgradient(p, x)).max())
    return BoundReport(
        bound_name="grad_floor",
        ks=np.array([0], dtype=np.int64),
        lhs=np.array([floor]),
        rhs=np.array([observed]),
        note="lhs is the floor; rhs is the observed sup-norm",
    )


@dataclass
class BoundReport:
    """Per-step comparison of an observed quantity against a bound.

    `lhs` must stay below `rhs`; margin = rhs - lhs.  The report passes
    when every margin is >= -1e-9 * max(1, |rhs|).
    """

    bound_name: str
    ks: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    applicable: bool = True
    note: str = ""

    @property
    def margins(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def passed(self):
        if not self.applicable:
            return None
        tol = PASS_TOL * np.maximum(1.0, np.abs(self.rhs))
        return bool(np.all(self.margins >= -tol))

    def worst_margin(self) -> float:
        return float(self.margins.min()) if self.ks.size else math.inf

    def to_dict(self) -> dict:
        return {
            "bound": self.bound_name,
            "applicable": self.applicable,
            "pass": self.passed,
            "note": self.note,
            "checks": [
                {
                    "k": int(k),
                    "lhs": float(l),
                    "rhs": float(r),
                    "margin": float(r - l),
                }
                for k, l, r in zip(self.ks, self.lhs, self.rhs)
            ],
        }

    def csv_rows(self):
        """Rows (bound_name, k, lhs, rhs, margin, pass)."""
        ok = self.passed
        return [
            (self.bound_name, int(k), float(l), float(r), float(r - l),
             "" if ok is None else str(ok).lower())
            for k, l, r in zip(self.ks, self.lhs, self.rhs)
        ]


BOUND_NAMES = ("diminishing_gap", "constant_gap", "constant_neighborhood",
               "noise_spread", "descent")


def _require_oracle(record: RunRecord, what: str):
    if record.oracle is None:
        raise AnalysisError(f"{what} needs the optimal-set oracle, which is unavailable")
    return record.oracle


def _gate(p: ProblemInstance):
    try:
        ok = p.lam > penalty_lower_bound(p)
    except ObjectiveError as exc:
        return False, f"critical penalty bound unavailable: {exc}"
    if not ok:
        return False, "penalty factor is not above the critical bound"
    return True, ""


def descent_margins(p: ProblemInstance, record: RunRecord, xstar: float) -> "BoundReport":
    """Per-step contraction inequality against one optimal anchor:
    ||x_next - x*||^2 <= ||x - x*||^2 - 2*rho*(penalized gap) + rho^2*ca^2."""
    if not record.has_full_trajectory():
        raise AnalysisError("descent check requires record_stride=1 states")
    star = _require_oracle(record, "descent check")
    applicable, note = _gate(p)
    xs = record.states
    K = record.steps
    rhos = np.array([record.schedule.rho_at(u) for u in range(1, K + 1)])
    gtot = np.zeros(xs.shape[0])
    for i, lo in enumerate(p.locals):
        gtot = gtot + lo.value(xs[:, i])
    eu, ev, ew = p.graph.edge_arrays()
    h = np.abs(xs[:, eu] - xs[:, ev]) @ ew if len(ew) else np.zeros(xs.shape[0])
    ftil = gtot + p.lam * h
    dist2 = ((xs - xstar) ** 2).sum(axis=1)
    ca = penalized_subgrad_norm_bound(p)
    lhs = dist2[1:]
    rhs = dist2[:-1] - 2.0 * rhos * (ftil[:-1] - star.f_star) + rhos * rhos * ca * ca
    return BoundReport(
        bound_name=f"descent(xstar={xstar:g})",
        ks=record.rec_ks[1:].copy(),
        lhs=lhs,
        rhs=rhs,
        applicable=applicable,
        note=note,
    )


def verify_run(p: ProblemInstance, record: RunRecord, bounds,
               noise: NoiseModel | None = None) -> list:
    """Evaluate the requested bounds against a recorded run.

    Bounds whose penalty-factor precondition fails are reported as
    inapplicable rather than failed.  Missing metrics raise
    AnalysisError naming what is needed.
    """
    reports = []
    applicable, note = _gate(p)
    for name in bounds:
        if name == "diminishing_gap":
            star = _require_oracle(record, "diminishing_gap")
            if not isinstance(record.schedule, PowerLaw):
                raise AnalysisError("diminishing_gap applies to power-law schedules")
            d0 = star.distance(record.states[0]) if record.rec_ks[0] == 0 else None
            if d0 is None:
                raise AnalysisError("diminishing_gap needs the initial state recorded")
            mask = record.rec_ks >= 2
            ks = record.rec_ks[mask]
            lhs = record.minf1[mask].max(axis=1) - star.f_star
            if applicable:
                rhs = np.array([
                    diminishing_gap_bound(p, record.schedule.alpha, int(k), d0)
                    for k in ks
                ])
            else:
                rhs = np.full(ks.shape, np.nan)
            reports.append(BoundReport("diminishing_gap", ks, lhs, rhs,
                                       applicable=applicable, note=note))
        elif name == "constant_gap":
            star = _require_oracle(record, "constant_gap")
            if not isinstance(record.schedule, Constant):
                raise AnalysisError("constant_gap applies to constant schedules")
            if record.rec_ks[0] != 0:
                raise AnalysisError("constant_gap needs the initial state recorded")
            d0 = star.distance(record.states[0])
            mask = record.rec_ks >= 1
            ks = record.rec_ks[mask]
            lhs = record.minf0[mask].max(axis=1) - star.f_star
            if applicable:
                rhs = np.array([
                    constant_gap_bound(p, record.schedule.rho, int(k), d0) for k in ks
                ])
            else:
                rhs = np.full(ks.shape, np.nan)
            reports.append(BoundReport("constant_gap", ks, lhs, rhs,
                                       applicable=applicable, note=note))
        elif name == "constant_neighborhood":
            _require_oracle(record, "constant_neighborhood")
            if not isinstance(record.schedule, Constant):
                raise AnalysisError("constant_neighborhood applies to constant schedules")
            if not np.isfinite(record.max_d_tail):
                raise AnalysisError("constant_neighborhood needs the tail distance metric")
            ks = np.array([record.steps], dtype=np.int64)
            lhs = np.array([record.max_d_tail])
            rhs = (np.array([constant_neighborhood_bound(p, record.schedule.rho)])
                   if applicable else np.array([np.nan]))
            reports.append(BoundReport("constant_neighborhood", ks, lhs, rhs,
                                       applicable=applicable,
                                       note=note or "lhs is max distance over the final 10% of steps"))
        elif name == "noise_spread":
            if record.algorithm != "algo2":
                raise AnalysisError("noise_spread applies to noisy-sign runs")
            if noise is None:
                raise AnalysisError("noise_spread needs the run's NoiseModel")
            ks = np.array([record.steps], dtype=np.int64)
            lhs = np.array([record.terminal_v()])
            rhs = (np.array([1.1 * noise_spread_bound(p, noise)])
                   if applicable else np.array([np.nan]))
            reports.append(BoundReport(
                "noise_spread", ks, lhs, rhs, applicable=applicable,
                note=note or "rhs includes the 1.1 stochastic acceptance slack",
            ))
        elif name == "descent":
            star = _require_oracle(record, "descent")
            anchors = [star.lo] if star.hi == star.lo else [star.lo, star.hi]
            for anchor in anchors:
                reports.append(descent_margins(p, record, anchor))
        else:
            raise AnalysisError(f"unknown bound {name!r}")
    return reports


def reports_to_csv_text(reports) -> str:
    lines = ["bound_name,k,lhs,rhs,margin,pass"]
    for rep in reports:
        for name, k, lhs, rhs, margin, ok in rep.csv_rows():
            lines.append(f"{name},{k},{lhs!r},{rhs!r},{margin!r},{ok}")
    return "\n".join(lines) + "\n"
