"""Acceptance suite: one test per exit criterion, each printing a
pass/fail line (run with `pytest tests/test_acceptance.py -s` to see
them inline)."""

import math
import time

import numpy as np
import pytest

import signopt as so
from signopt.presets import preset_runs, quantile_regression_samples, FIG6_WEIGHT_SEED
from signopt.runconfig import parse_config
from signopt.cli import execute_config

MEDIAN_DATA = (4.45, 14.99, 24.28, 26.21, 44.24, 58.61, 68.78, 75.49)
X0_MEDIAN = np.linspace(4.45, 75.49, 8)


def _report(cid: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {cid}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{cid}: {detail}"


def _example1(lam=1.05):
    locs = tuple(so.AbsDeviation(s) for s in (0.0, 2.0, 4.0, 6.0))
    return so.ProblemInstance(so.ring(4, 1.0), locs, lam)


def _median(alpha, lam):
    locs = tuple(so.Quantile(alpha, y, 1.0) for y in MEDIAN_DATA)
    return so.ProblemInstance(so.ring(8, 1.0), locs, lam)


def test_criterion_01_penalty_tightness_grid():
    t0 = time.perf_counter()
    p = _example1()
    lam_bound = so.penalty_lower_bound(p)
    assert lam_bound == 1.0  # exact

    below = p.with_lam(0.95)
    witness = so.penalized_objective(below, [2.0, 2.0, 4.0, 4.0])
    assert witness == 7.8 and witness < 8.0

    cert_below = so.grid_certify(below, -1.0, 7.0, 0.1)
    assert cert_below.min_value < 8.0 - 1e-6
    assert cert_below.min_value <= witness + 1e-9

    cert_above = so.grid_certify(p, -1.0, 7.0, 0.1)
    assert cert_above.min_value >= 8.0 - 1e-6
    # minimizers hug the consensus line over the optimal interval
    assert cert_above.near_max_spread <= 0.1 + 1e-9
    assert cert_above.near_mean_lo >= 2.0 - 0.1 - 1e-9
    assert cert_above.near_mean_hi <= 4.0 + 0.1 + 1e-9
    elapsed = time.perf_counter() - t0
    _report(
        "criterion 1 (penalty tightness)",
        elapsed < 60.0,
        f"bound=1.0 exact, witness 7.8 < 8, grid min {cert_above.min_value!r} "
        f"with {cert_above.near_count} consensus minimizers, {elapsed:.1f}s",
    )


def test_criterion_02_median_reproduction():
    sched = so.AffineReciprocal(100, 10)
    timings, oks = [], []
    for lam, expect_consensus in ((1.05, True), (10.0, True), (0.95, False)):
        p = _median(0.5, lam)
        t0 = time.perf_counter()
        rec = so.run(p, "algo1", sched, X0_MEDIAN, 100_000, record_stride=1000)
        timings.append(time.perf_counter() - t0)
        ts = rec.terminal_state()
        if expect_consensus:
            oks.append(bool(np.all(ts >= 26.16) and np.all(ts <= 44.29)
                            and rec.terminal_v() < 0.05))
        else:
            oks.append(rec.terminal_v() > 1.0)
    _report(
        "criterion 2 (median reproduction)",
        all(oks) and max(timings) < 10.0,
        f"lam 1.05/10 consensus in band, lam 0.95 spread; "
        f"slowest run {max(timings):.2f}s",
    )


def test_criterion_03_diminishing_rate_bound():
    p = _example1()
    star = so.optimal_set(p.locals)
    x0 = np.array([0.0, 2.0, 4.0, 6.0])
    d0 = star.distance(x0)
    checks = 0
    for alpha in (1.0, 0.75, 0.5):
        rec = so.run(p, "algo1", so.PowerLaw(alpha), x0, 100_000,
                     record_stride=100)
        for k in (100, 1_000, 10_000, 100_000):
            i = int(np.searchsorted(rec.rec_ks, k))
            assert rec.rec_ks[i] == k
            lhs = float(rec.minf1[i].max()) - star.f_star
            rhs = so.diminishing_gap_bound(p, alpha, k, d0)
            assert lhs <= rhs + 1e-9 * max(1.0, abs(rhs))
            checks += 1
    _report("criterion 3 (diminishing-step rate bound)", checks == 12,
            f"{checks} (alpha, k) checks within tolerance, d0={d0:.6f}")


def test_criterion_04_constant_step_gap_bound():
    p = _example1()
    star = so.optimal_set(p.locals)
    x0 = np.array([0.0, 2.0, 4.0, 6.0])
    ca = so.penalized_subgrad_norm_bound(p)
    details = []
    for rho in (0.02, 0.005):
        rec = so.run(p, "algo1", so.Constant(rho), x0, 100_000, record_stride=100)
        (rep,) = so.verify_run(p, rec, ["constant_gap"])
        assert rep.passed
        terminal_gap = float(rec.minf0[-1].max()) - star.f_star
        assert terminal_gap <= rho * ca * ca / 2.0 + 1e-3
        details.append(f"rho={rho}: margin {rep.worst_margin():.3g}, "
                       f"terminal gap {terminal_gap:.3g}")
    _report("criterion 4 (constant-step gap bound)", True, "; ".join(details))


def test_criterion_05_constant_step_neighborhood():
    p = _example1()
    rho = 0.005
    rec = so.run(p, "algo1", so.Constant(rho), [0.0, 2.0, 4.0, 6.0],
                 1_000_000, record_stride=10_000)
    rhs = so.constant_neighborhood_bound(p, rho)
    ok = rec.max_d_tail <= rhs
    _report("criterion 5 (constant-step neighborhood)", ok,
            f"max distance over final 10% = {rec.max_d_tail:.4f} <= {rhs:.4f}")


def _kink_free_states(p, rng, count):
    """Random non-consensus states with pairwise-distinct components away
    from every local kink, mixing wide and near-consensus scales."""
    kinks = np.array(sorted({b for lo in p.locals for b in lo.breakpoints()}))
    n = p.graph.n
    out = []
    while len(out) < count:
        if rng.uniform() < 0.5:
            x = rng.uniform(-10.0, 90.0, size=n)
        else:
            base = rng.uniform(kinks.min() - 2, kinks.max() + 2)
            x = base + rng.uniform(-1e-3, 1e-3, size=n)
        if np.min(np.abs(np.subtract.outer(x, x))[~np.eye(n, dtype=bool)]) < 1e-9:
            continue
        if np.min(np.abs(np.subtract.outer(x, kinks))) < 1e-9:
            continue
        out.append(x)
    return out


def test_criterion_06_nonconsensus_subgradient_floor():
    rng = np.random.default_rng(60)
    cases = (
        (_median(0.5, 2.0), 0.5),
        (_example1(1.05), 0.05),
    )
    for p, floor_expect in cases:
        floor = so.nonconsensus_grad_floor(p)
        assert floor == pytest.approx(floor_expect, abs=1e-12)
        worst = math.inf
        for x in _kink_free_states(p, rng, 10_000):
            g = so.penalized_subgradient(p, x)
            worst = min(worst, float(np.abs(g).max()))
            assert worst >= floor - 1e-12
    _report("criterion 6 (non-consensus gradient floor)", True,
            "floors 0.5 and 0.05 hold on 10^4 kink-free states each")


def test_criterion_07_folded_normal():
    for sigma in (0.25, 1.0, 3.0, 10.0):
        exact = so.folded_normal_mean(0.0, sigma)
        assert abs(exact - sigma * math.sqrt(2.0 / math.pi)) < 1e-12
    n = 10_000_000
    details = []
    for mu, sigma, seed in ((0.0, 1.0, 71), (1.0, 2.0, 72), (-3.0, 1.0, 73)):
        z = np.abs(mu + sigma * so.normal_variates(seed, n))
        se = float(z.std()) / math.sqrt(n)
        err = abs(float(z.mean()) - so.folded_normal_mean(mu, sigma))
        assert err < 4.0 * se
        details.append(f"({mu},{sigma}): err={err:.2e} < 4se={4 * se:.2e}")
    _report("criterion 7 (folded normal)", True, "; ".join(details))


def test_criterion_08_noisy_neighborhood():
    p = _median(0.4, 2.0)
    star = so.optimal_set(p.locals)
    vs, dists = [], []
    rhs = None
    for seed in range(5):
        noise = so.NoiseModel.uniform(p.graph, 3.0, seed)
        rhs = so.noise_spread_bound(p, noise)
        rec = so.run(p, "algo2", so.AffineReciprocal(40, 20), X0_MEDIAN,
                     100_000, record_stride=1000, noise=noise)
        vs.append(rec.terminal_v())
        dists.append(max(star.point_distance(float(t))
                         for t in rec.terminal_state()))
    ok = all(v <= 1.1 * rhs for v in vs) and all(d <= rhs + 0.5 for d in dists)
    _report("criterion 8 (noisy-sign neighborhood)", ok,
            f"5 seeds: max v {max(vs):.3f} <= {1.1 * rhs:.3f}, "
            f"max dist {max(dists):.3f} <= {rhs + 0.5:.3f}")


def test_criterion_09_random_graph_regression():
    worst = 0.0
    for seed in range(10):
        for item in preset_runs("fig6", seed=seed):
            cfg = parse_config(item["config"])
            star = so.optimal_set(cfg.problem.locals)
            rec = execute_config(cfg)
            worst = max(worst, max(star.point_distance(float(t))
                                   for t in rec.terminal_state()))
    assert worst <= 0.05

    # degenerate activation: always-on unit edges reproduce the static
    # iteration bit for bit
    y, s = quantile_regression_samples()
    g = so.ring(20, 1.0)
    locs = tuple(so.Quantile(0.5, float(yi), float(si)) for yi, si in zip(y, s))
    p = so.ProblemInstance(g, locs, 15.0)
    act = so.ActivationMatrix(g, (1.0,) * g.m, seed=4)
    sched = so.AffineReciprocal(40, 300)
    x0 = np.linspace(-8, 12, 20)
    a = so.run(p, "algo3", sched, x0, 20_000, record_stride=500, activation=act)
    b = so.run(p, "algo1", sched, x0, 20_000, record_stride=500)
    bitwise = np.array_equal(a.states, b.states)
    _report("criterion 9 (random-graph regression)", bitwise,
            f"30 preset runs within {worst:.4f} of the oracle estimate; "
            f"always-on activation bitwise equals the static run: {bitwise}")


def test_criterion_10_descent_inequality():
    p = _median(0.5, 1.05)
    rec = so.run(p, "algo1", so.AffineReciprocal(100, 10), X0_MEDIAN,
                 100_000, record_stride=1)
    reports = so.verify_run(p, rec, ["descent"])
    anchors = sorted(rep.bound_name for rep in reports)
    assert anchors == ["descent(xstar=26.21)", "descent(xstar=44.24)"]
    ok = all(rep.passed for rep in reports)
    _report("criterion 10 (per-step descent inequality)", ok,
            "; ".join(f"{rep.bound_name}: worst margin {rep.worst_margin():.3g}"
                      for rep in reports))
