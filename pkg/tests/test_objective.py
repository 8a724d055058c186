import numpy as np
import pytest

import signopt as so
from signopt.objective import ObjectiveError, locals_arrays
from conftest import MEDIAN_DATA, median_problem


class TestLocalFamilies:
    def test_quantile_median_branch(self):
        q = so.Quantile(0.5, 0.0, 1.0)
        # residual 0 - (-2)*1 = 2 >= 0
        assert float(q.value(-2.0)) == pytest.approx(1.0)
        assert float(q.subgrad(-2.0)) == pytest.approx(-0.5)

    def test_abs_kink_returns_zero(self):
        a = so.AbsDeviation(2.0)
        assert float(a.value(2.0)) == 0.0
        assert float(a.subgrad(2.0)) == 0.0

    def test_quantile_negative_residual(self):
        # hand evaluation: residual 26.21 - 30 = -3.79 < 0
        q = so.Quantile(0.4, 26.21, 1.0)
        assert float(q.value(30.0)) == pytest.approx((1 - 0.4) * 3.79)
        assert float(q.subgrad(30.0)) == pytest.approx(0.6)

    def test_quantile_kink_takes_ge_branch(self):
        q = so.Quantile(0.3, 6.0, 2.0)
        assert float(q.subgrad(3.0)) == pytest.approx(-0.3 * 2.0)

    def test_quadratic(self):
        p = so.Quadratic(2.0, 1.0)
        assert float(p.value(3.0)) == pytest.approx(8.0)
        assert float(p.subgrad(3.0)) == pytest.approx(8.0)
        with pytest.raises(ObjectiveError):
            so.Quadratic(-1.0, 0.0)

    @pytest.mark.parametrize("lo", [
        so.AbsDeviation(1.5),
        so.Quantile(0.3, 2.0, 1.5),
        so.Quantile(0.9, -1.0, -0.7),
        so.Quadratic(0.8, -2.0),
    ])
    def test_convexity_of_subgradient_selection(self, lo):
        rng = np.random.default_rng(0)
        xs = rng.uniform(-6, 6, size=60)
        ys = rng.uniform(-6, 6, size=60)
        fx = lo.value(xs)
        gx = lo.subgrad(xs)
        fy = lo.value(ys)
        assert np.all(fy >= fx + (ys - xs) * gx - 1e-12)


class TestPenalty:
    def test_consensus_state_has_zero_penalty(self, ring4):
        assert so.disagreement_penalty(ring4, np.full(4, 3.7)) == 0.0

    def test_example_witness_state(self, ring4):
        assert so.disagreement_penalty(ring4, [2, 2, 4, 4]) == pytest.approx(4.0)

    def test_matches_half_double_sum_oracle(self):
        rng = np.random.default_rng(1)
        g = so.ring_random_weights(9, 4)
        for _ in range(20):
            x = rng.uniform(-5, 5, size=9)
            A = g.adjacency()
            oracle = 0.5 * np.sum(A * np.abs(x[:, None] - x[None, :]))
            assert so.disagreement_penalty(g, x) == pytest.approx(oracle, rel=1e-12)

    def test_dimension_mismatch(self, ring4):
        with pytest.raises(ObjectiveError):
            so.disagreement_penalty(ring4, [1.0, 2.0])


class TestPenalizedObjective:
    def test_example1_witness_value(self, example1):
        p1 = example1.with_lam(1.0)
        assert so.penalized_objective(p1, [2, 2, 4, 4]) == pytest.approx(8.0)
        p095 = example1.with_lam(0.95)
        assert so.penalized_objective(p095, [2, 2, 4, 4]) == pytest.approx(7.8)

    def test_consensus_value_is_plain_objective(self, example1):
        for lam in (0.5, 1.05, 10.0):
            p = example1.with_lam(lam)
            assert so.penalized_objective(p, np.full(4, 3.0)) == pytest.approx(8.0)

    def test_optimal_consensus_attains_f_star(self, example1):
        star = so.optimal_set(example1.locals)
        for t in (star.lo, star.hi, 0.5 * (star.lo + star.hi)):
            val = so.penalized_objective(example1, np.full(4, t))
            assert val == pytest.approx(star.f_star, abs=1e-9)


class TestPenalizedSubgradient:
    def test_consensus_above_all_targets(self, example1):
        g = so.penalized_subgradient(example1, np.full(4, 100.0))
        assert np.allclose(g, np.ones(4))

    def test_hand_evaluated_component(self, ring4):
        locs = tuple(so.AbsDeviation(s) for s in (0.0, 2.0, 4.0, 6.0))
        p = so.ProblemInstance(ring4, locs, 2.0)
        g = so.penalized_subgradient(p, [0.0, 1.0, 2.0, 3.0])
        # node 0: 2*(sgn(0-1) + sgn(0-3)) + sgn(0-0) = -4
        assert g[0] == pytest.approx(-4.0)

    def test_is_valid_subgradient(self, example1):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = rng.uniform(-3, 9, size=4)
            y = rng.uniform(-3, 9, size=4)
            fx = so.penalized_objective(example1, x)
            fy = so.penalized_objective(example1, y)
            gx = so.penalized_subgradient(example1, x)
            assert fy >= fx + (y - x) @ gx - 1e-9

    def test_norm_within_uniform_bound(self, example1):
        rng = np.random.default_rng(3)
        ca = so.penalized_subgrad_norm_bound(example1)
        for _ in range(200):
            x = rng.uniform(-50, 50, size=4)
            assert np.linalg.norm(so.penalized_subgradient(example1, x)) <= ca + 1e-12


class TestBounds:
    def test_uniform_subgradient_bound_examples(self, example1):
        assert so.uniform_subgradient_bound(example1.locals) == 1.0
        medians = tuple(so.Quantile(0.5, y, 1.0) for y in MEDIAN_DATA)
        assert so.uniform_subgradient_bound(medians) == 0.5
        mixed = (so.Quantile(0.9, 0.0, 1.0), so.Quantile(0.9, 1.0, 2.0))
        assert so.uniform_subgradient_bound(mixed) == pytest.approx(1.8)

    def test_uniform_bound_rejects_quadratics(self):
        with pytest.raises(ObjectiveError):
            so.uniform_subgradient_bound((so.Quadratic(1.0, 0.0),))

    def test_penalty_lower_bound_example1(self, example1):
        assert so.penalty_lower_bound(example1) == pytest.approx(1.0)

    def test_penalty_lower_bound_median8(self, median8):
        assert so.penalty_lower_bound(median8) == pytest.approx(1.0)

    def test_penalty_lower_bound_weight_scaling(self, example1):
        doubled = example1.graph.reweighted([2.0] * example1.graph.m)
        p = so.ProblemInstance(doubled, example1.locals, 1.05)
        assert so.penalty_lower_bound(p) == pytest.approx(0.5)

    def test_penalty_lower_bound_disconnected(self):
        g = so.WeightedGraph(3, ((0, 1, 1.0),))
        p = so.ProblemInstance(g, (so.AbsDeviation(0.0),) * 3, 1.0)
        with pytest.raises(ObjectiveError):
            so.penalty_lower_bound(p)


class TestMinimizerSubgradientBound:
    def test_identical_quadratics(self):
        locs = (so.Quadratic(1.0, 3.0),) * 4
        assert so.minimizer_subgradient_bound(locs) == 0.0

    def test_two_quadratics(self):
        # grad f_i(x) = 2(x - b_i); cross evaluations both have magnitude 4
        locs = (so.Quadratic(1.0, 0.0), so.Quadratic(1.0, 2.0))
        assert so.minimizer_subgradient_bound(locs) == pytest.approx(4.0)

    def test_abs_families_stay_below_one(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            locs = tuple(so.AbsDeviation(float(s)) for s in rng.uniform(-5, 5, 6))
            assert so.minimizer_subgradient_bound(locs) <= 1.0 + 1e-15


class TestOptimalSet:
    def test_example1_interval(self, example1_locals):
        star = so.optimal_set(example1_locals)
        assert (star.lo, star.hi) == (2.0, 4.0)
        assert star.f_star == pytest.approx(8.0)

    def test_median_interval(self):
        locs = tuple(so.Quantile(0.5, y, 1.0) for y in MEDIAN_DATA)
        star = so.optimal_set(locs)
        assert star.lo == pytest.approx(26.21)
        assert star.hi == pytest.approx(44.24)

    def test_quantile04_unique_point(self):
        locs = tuple(so.Quantile(0.4, y, 1.0) for y in MEDIAN_DATA)
        star = so.optimal_set(locs)
        assert star.lo == star.hi == pytest.approx(26.21)

    def test_single_abs(self):
        star = so.optimal_set((so.AbsDeviation(5.0),))
        assert (star.lo, star.hi) == (5.0, 5.0)
        assert star.f_star == 0.0

    def test_quadratic_closed_form(self):
        locs = (so.Quadratic(1.0, 0.0), so.Quadratic(3.0, 4.0))
        star = so.optimal_set(locs)
        assert star.lo == star.hi == pytest.approx(3.0)
        assert star.f_star == pytest.approx(9.0 + 3.0 * 1.0)

    def test_mixed_families_rejected(self):
        with pytest.raises(ObjectiveError):
            so.optimal_set((so.AbsDeviation(0.0), so.Quadratic(1.0, 0.0)))

    def test_value_flat_across_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            locs = tuple(so.AbsDeviation(float(s)) for s in rng.uniform(-9, 9, 6))
            star = so.optimal_set(locs)
            for t in (star.lo, star.hi, 0.5 * (star.lo + star.hi)):
                assert float(so.total_objective(locs, t)) == pytest.approx(
                    star.f_star, abs=1e-9
                )
            # strictly worse just outside
            eps = 1e-6
            assert float(so.total_objective(locs, star.lo - eps)) > star.f_star
            assert float(so.total_objective(locs, star.hi + eps)) > star.f_star


class TestQuadraticEnvelope:
    def test_envelope_inequality_holds(self):
        locs = (so.Quadratic(1.0, 0.0), so.Quadratic(2.0, 2.0), so.Quadratic(0.5, -1.0))
        c, alpha = so.quadratic_envelope_constants(locs)
        star = so.optimal_set(locs)
        xs = np.linspace(-20, 20, 4001)
        dist2 = np.minimum(np.abs(xs - star.lo), np.abs(xs - star.hi)) ** 2
        for lo in locs:
            lhs = lo.subgrad(xs) ** 2
            assert np.all(lhs <= 0.5 * c * c * (alpha + dist2) + 1e-9)


class TestChainAndLowerBoundProperties:
    def test_node_objective_below_double_penalty(self):
        # f(x_i) <= penalized objective with doubled factor, all nodes
        rng = np.random.default_rng(6)
        for _ in range(20):
            lam = 1.0 + rng.uniform(0.1, 3.0)
            p = median_problem(0.5, lam)
            assert lam > so.penalty_lower_bound(p)
            x = rng.uniform(0, 80, size=8)
            f2 = so.penalized_objective(p.with_lam(2 * lam), x)
            f_nodes = so.total_objective(p.locals, x)
            assert np.all(f_nodes <= f2 + 1e-9)

    def test_spread_lower_bound_identity(self, example1):
        # penalized gap >= mean gap + (lam*a_min - c*n/2) * spread
        rng = np.random.default_rng(7)
        star = so.optimal_set(example1.locals)
        a_min = so.smallest_weights_sum(example1.graph, 2)
        c = so.uniform_subgradient_bound(example1.locals)
        n = example1.graph.n
        for _ in range(100):
            x = rng.uniform(-5, 11, size=4)
            lhs = so.penalized_objective(example1, x) - star.f_star
            xbar = float(x.mean())
            rhs = (float(so.total_objective(example1.locals, xbar)) - star.f_star
                   + (example1.lam * a_min - c * n / 2.0) * (x.max() - x.min()))
            assert lhs >= rhs - 1e-9


class TestGridCertify:
    def test_two_node_exact(self):
        g = so.WeightedGraph(2, ((0, 1, 1.0),))
        locs = (so.AbsDeviation(0.0), so.AbsDeviation(1.0))
        p = so.ProblemInstance(g, locs, 2.0)
        cert = so.grid_certify(p, 0.0, 1.0, 0.5)
        # lam above critical bound (=1): minimum on the consensus
        # segment [0,1]; grid consensus points 0.0, 0.5, 1.0 all give 1.0
        assert cert.min_value == pytest.approx(1.0)
        assert cert.near_count == 3
        assert cert.near_max_spread == 0.0

    def test_below_bound_witness(self, example1):
        p = example1.with_lam(0.95)
        cert = so.grid_certify(p, -1.0, 7.0, 0.5)
        assert cert.min_value == pytest.approx(7.8)
        assert cert.min_value < 8.0 - 1e-6
