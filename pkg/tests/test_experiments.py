import math
import random

import numpy as np
import pytest

from dispersion import bounds
from dispersion.experiments import (EULER_GAMMA, SimConfig, anchored_box, coupon_time, coupon_variance,
                                    estimate_expected_dispersion, estimate_inverse,
                                    simulate_anchored_box, simulate_circle_gaps, simulate_coupon,
                                    simulate_split_lower_bound)
from dispersion.rng import check_seed, replicate_rng, run_replicates, summarize, z_value


class TestRng:
    def test_streams_reproducible_and_distinct(self):
        a = replicate_rng(5, 3).random(4)
        assert np.array_equal(a, replicate_rng(5, 3).random(4))
        assert not np.array_equal(a, replicate_rng(5, 4).random(4))
        assert not np.array_equal(a, replicate_rng(6, 3).random(4))

    def test_worker_count_irrelevant(self):
        fn = lambda rng: float(rng.random())
        base = run_replicates(fn, 37, 9, workers=1)
        assert run_replicates(fn, 37, 9, workers=4) == base
        assert run_replicates(fn, 37, 9, workers=64) == base

    def test_seed_range(self):
        assert check_seed(2**64 - 1) == 2**64 - 1
        with pytest.raises(ValueError):
            check_seed(-1)
        with pytest.raises(ValueError):
            check_seed(2**64)

    def test_invalid_counts(self):
        with pytest.raises(ValueError):
            run_replicates(lambda r: 0, 0, 1)
        with pytest.raises(ValueError):
            run_replicates(lambda r: 0, 3, 1, workers=0)


class TestSummary:
    def test_ci_formula(self):
        vals = [0.1, 0.4, 0.35, 0.9, 0.2]
        s = summarize(vals, 0.95)
        sd = float(np.std(vals, ddof=1))
        assert s.mean == pytest.approx(np.mean(vals))
        assert s.std == pytest.approx(sd)
        assert s.half_width == pytest.approx(1.959963984540054 * sd / math.sqrt(5))
        assert s.ci == pytest.approx((s.mean - s.half_width, s.mean + s.half_width))

    def test_single_value(self):
        s = summarize([0.3])
        assert s.std is None and s.ci is None and s.to_dict()["variance_defined"] is False

    def test_order_independent(self):
        rng = np.random.default_rng(1)
        vals = list(rng.random(1000) * 10.0 ** rng.integers(-8, 8, 1000))
        base = summarize(vals)
        random.Random(2).shuffle(vals)
        assert summarize(vals).mean == base.mean

    def test_z(self):
        assert z_value(0.95) == pytest.approx(1.959964, abs=1e-6)
        with pytest.raises(ValueError):
            z_value(1.0)


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(0, 1, 10, 1)
        with pytest.raises(ValueError):
            SimConfig(5, 1, 10, 1, method="bogus")
        with pytest.raises(ValueError):
            SimConfig(5, 1, 10, 1, method="certified")
        with pytest.raises(ValueError):
            SimConfig(5, 2, 10, 1, periodic=True)
        with pytest.raises(ValueError):
            SimConfig(5, 1, 10, -3)

    def test_resolution(self):
        assert SimConfig(5, 2, 10, 1, method="certified", delta=0.5).resolution == 8
        assert SimConfig(5, 2, 10, 1).resolution is None


class TestEstimate:
    def test_single_point_one_dim(self):
        r = estimate_expected_dispersion(SimConfig(1, 1, 20000, 3))
        assert abs(r.estimate.mean - 0.75) <= 3 * r.estimate.half_width

    def test_single_point_two_dim(self):
        # E max(U, V) over two iid U[1/2, 1] is 1/2 + 1/3
        r = estimate_expected_dispersion(SimConfig(1, 2, 20000, 4))
        assert abs(r.estimate.mean - 5 / 6) <= 3 * r.estimate.half_width

    def test_two_points_one_dim(self):
        # largest of three uniform spacings: H_3 / 3
        r = estimate_expected_dispersion(SimConfig(2, 1, 20000, 5))
        assert abs(r.estimate.mean - 11 / 18) <= 3 * r.estimate.half_width

    def test_bound_verdicts(self):
        r = estimate_expected_dispersion(SimConfig(8, 1, 2000, 42))
        assert r.lower_ok and r.upper_ok
        lower = next(c for c in r.comparisons if c.name == "expected_lower")
        assert lower.bound == pytest.approx(max(math.log(8) / 72, 1 / (16 * math.e)))
        upper = next(c for c in r.comparisons if c.name == "expected_upper")
        assert upper.bound == 1.0 and "vacuous" in upper.note

    def test_comparison_omitted_when_n_not_above_d(self):
        r = estimate_expected_dispersion(SimConfig(4, 4, 50, 1))
        assert r.lower_ok is None and r.upper_ok is None
        assert any("requires n > d" in note for note in r.notes)

    def test_deterministic_across_workers(self):
        a = estimate_expected_dispersion(SimConfig(12, 3, 60, 7, workers=1)).to_dict()
        b = estimate_expected_dispersion(SimConfig(12, 3, 60, 7, workers=3)).to_dict()
        assert a == b

    def test_monotone_sanity(self):
        for d in (1, 2):
            prev = None
            for n in (4, 8, 16, 32):
                r = estimate_expected_dispersion(SimConfig(n, d, 400, 11))
                if prev is not None:
                    assert prev.estimate.mean >= r.estimate.mean - prev.estimate.half_width - r.estimate.half_width
                prev = r

    def test_certified_interval(self):
        cfg = SimConfig(10, 2, 200, 1, method="certified", delta=0.5)
        r = estimate_expected_dispersion(cfg)
        exact = estimate_expected_dispersion(SimConfig(10, 2, 200, 1))
        lo, up = r.interval
        assert lo <= exact.estimate.mean <= up
        assert up - lo <= 0.5 + 1e-12
        assert r.estimate is None and r.to_dict()["config"]["resolution"] == 8

    def test_periodic(self):
        r = estimate_expected_dispersion(SimConfig(50, 1, 500, 2, periodic=True))
        plain = estimate_expected_dispersion(SimConfig(50, 1, 500, 2))
        # same streams, periodic gaps dominate the plain ones pointwise
        assert r.estimate.mean >= plain.estimate.mean
        assert any(c.name == "periodic_upper" for c in r.comparisons)
        c = estimate_expected_dispersion(SimConfig(6, 2, 20, 2, periodic=True, method="certified", delta=1.0))
        assert c.lower.mean <= c.upper.mean

    def test_single_replicate_flagged(self):
        r = estimate_expected_dispersion(SimConfig(5, 1, 1, 2))
        assert r.estimate.std is None
        assert any("single replicate" in n for n in r.notes)


class TestInverse:
    def test_trivial_eps(self):
        assert estimate_inverse(0.9, 1, SimConfig(1, 1, 2000, 1)).estimate == 1
        assert estimate_inverse(1.0, 3, SimConfig(1, 3, 10, 1)).estimate == 1

    def test_two_points_needed(self):
        r = estimate_inverse(0.7, 1, SimConfig(1, 1, 4000, 1))
        assert r.estimate == 2 and r.bracket == (1, 2)

    def test_bracket_and_bounds(self):
        r = estimate_inverse(0.03, 1, SimConfig(1, 1, 300, 1))
        lo, hi = r.bracket
        assert hi == r.estimate and lo < hi
        assert {c.name for c in r.comparisons} == {"inverse_lower", "inverse_upper"}
        assert all(c.ok for c in r.comparisons)
        assert all(e["pass"] == (e["high_edge"] <= 0.03) for e in r.evaluations)

    def test_budget_exhausted(self):
        with pytest.raises(RuntimeError):
            estimate_inverse(0.01, 1, SimConfig(1, 1, 50, 1), max_n=8)

    def test_invalid(self):
        with pytest.raises(ValueError):
            estimate_inverse(0.0, 1, SimConfig(1, 1, 10, 1))


class TestCoupon:
    def test_single_coupon(self):
        r = simulate_coupon(1, 1, 100, 1)
        assert r["tail_prob"] == 0.0 and r["mean"]["mean"] == 1.0 and r["expected_mean"] == 1.0

    def test_two_coupons(self):
        r = simulate_coupon(2, 2, 20000, 2)
        assert r["expected_mean"] == 3.0
        assert r["mean_ok"]

    def test_variance_formula(self):
        assert coupon_variance(1) == 0.0
        assert coupon_variance(2) == pytest.approx(2.0)
        assert coupon_variance(50) <= math.pi**2 * 50**2 / 6

    def test_collection_time_covers_all_symbols(self):
        rng = replicate_rng(1, 0)
        for l in (1, 3, 10, 100):
            assert coupon_time(rng, l) >= l

    def test_tail_claim(self):
        l = 64
        n = math.floor((bounds.harmonic(l) - 2) * l)
        assert n == 175
        r = simulate_coupon(l, n, 4000, 3)
        assert r["claim_applies"] and r["tail_ok"] and r["mean_ok"]


class TestAnchored:
    def test_left_configuration(self):
        a, jstar, xstar = anchored_box([[0.4, 0.7], [0.8, 0.3]])
        assert list(jstar) == [1, 0]
        assert list(a) == [0.8, 0.7]
        assert np.prod(a) == pytest.approx(0.56)

    def test_right_configuration(self):
        a, jstar, _ = anchored_box([[0.25, 0.5], [0.7, 0.75]])
        assert list(jstar) == [1, 1]
        assert list(a) == [1.0, 0.5]

    def test_tie_goes_to_first_axis(self):
        _, jstar, _ = anchored_box([[0.5, 0.5, 0.2]])
        assert jstar[0] == 0

    def test_one_dimension_volume_is_point(self):
        r = simulate_anchored_box(1, 1, 20000, 1)
        assert r["volume"]["mean"] == r["product"]["mean"]
        assert r["product_ok"]

    def test_two_dimensions(self):
        r = simulate_anchored_box(2, 2, 20000, 2)
        assert r["target"] == pytest.approx(4 / 9)
        assert r["product_ok"] and r["target_exceeds_exp_bound"]
        assert r["volume"]["mean"] >= r["product"]["mean"]
        assert abs(r["xstar"]["mean"] - 2 / 3) <= 4 * r["xstar"]["stderr"]


class TestCircleGaps:
    def test_two_points(self):
        r = simulate_circle_gaps(1, 20000, 1)
        assert r["finite_n_expectation"] == pytest.approx(2 * 0.75 - math.log(2))
        assert abs(r["statistic"]["mean"] - r["finite_n_expectation"]) <= 4 * r["statistic"]["stderr"]
        assert r["ok"] is None

    def test_finite_n_expectation(self):
        r = simulate_circle_gaps(50, 5000, 2)
        assert abs(r["statistic"]["mean"] - r["finite_n_expectation"]) <= 4 * r["statistic"]["stderr"]

    def test_single_replicate(self):
        r = simulate_circle_gaps(5, 1, 1)
        assert r["statistic"]["std"] is None and any("single replicate" in n for n in r["notes"])

    def test_large_n_near_gamma(self):
        r = simulate_circle_gaps(5000, 500, 3)
        assert r["ok"] is not None
        assert abs(r["statistic"]["mean"] - EULER_GAMMA) <= 0.2


class TestSplit:
    def test_pigeonhole(self):
        r = simulate_split_lower_bound(3, 2, 50, 1)
        assert r["ell"] == 11 and r["p_empty"] == 1.0 and r["ok"]

    def test_hundred_points(self):
        r = simulate_split_lower_bound(100, 1, 2000, 2)
        assert r["p_empty"] > 0.5 and r["bound_estimate"] > 1 / (2 * r["ell"]) - 1e-15
        assert r["ok"]

    def test_invalid(self):
        with pytest.raises(ValueError):
            simulate_split_lower_bound(2, 1, 10, 1)
