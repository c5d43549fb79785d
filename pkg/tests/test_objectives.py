import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metricbias import CapabilityError, GrayImage, Histogram, ReconstructionRule, ThresholdSet
from metricbias import class_stats, exhaustive_search, histogram, kapur_objective, otsu_objective, reconstruct
from metricbias.objectives import OBJECTIVES, HistogramTables, bilevel_curves, evaluate, register_objective
from metricbias.reference import kapur_naive, otsu_naive, variance_split


def hist_of(*pixels) -> Histogram:
    return histogram(GrayImage(np.array([pixels], np.uint8)))


def random_hist(seed: int, support: int = 256) -> Histogram:
    rng = np.random.default_rng(seed)
    counts = np.zeros(256, np.int64)
    lo = int(rng.integers(0, 256 - support + 1))
    width = support
    density = rng.uniform(0.05, 1.0)
    mask = rng.random(width) < density
    counts[lo : lo + width] = rng.integers(1, 1000, width) * mask
    if counts.sum() == 0:
        counts[lo] = 1
    return Histogram(counts)


def random_tset(seed: int, k: int) -> ThresholdSet:
    rng = np.random.default_rng(seed + 7)
    return ThresholdSet(tuple(sorted(rng.choice(np.arange(1, 256), size=k, replace=False))))


seeds = st.integers(0, 2**31)
ks = st.integers(1, 3)


class TestThresholdSet:
    def test_boundaries(self):
        t = ThresholdSet.of(10, 20)
        assert t.boundaries == (0, 10, 20, 256)
        assert t.class_ranges() == [(0, 10), (10, 20), (20, 256)]
        assert t.k == 2

    @pytest.mark.parametrize("bad", [(), (0,), (256,), (5, 5), (9, 3)])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            ThresholdSet(bad)


class TestClassStats:
    def test_two_level(self):
        s = class_stats(hist_of(0, 0, 255, 255), ThresholdSet.of(128))
        np.testing.assert_array_equal(s.weights, [0.5, 0.5])
        np.testing.assert_array_equal(s.means, [0, 255])
        assert s.global_mean == 127.5

    def test_empty_class(self):
        s = class_stats(hist_of(7, 7, 7, 7), ThresholdSet.of(128))
        np.testing.assert_array_equal(s.weights, [1, 0])
        assert s.means[0] == 7 and math.isnan(s.means[1])
        assert not s.is_defined(1)
        assert s.global_mean == 7

    def test_uniform(self):
        s = class_stats(Histogram(np.ones(256, np.int64)), ThresholdSet.of(128))
        np.testing.assert_allclose(s.weights, [0.5, 0.5], rtol=0, atol=1e-15)
        np.testing.assert_allclose(s.means, [63.5, 191.5], rtol=1e-15)
        assert s.global_mean == 127.5

    @given(seeds, ks)
    def test_invariants(self, seed, k):
        h = random_hist(seed)
        t = random_tset(seed, k)
        s = class_stats(h, t)
        assert abs(s.weights.sum() - 1) <= 1e-12
        defined = s.weights > 0
        assert abs(np.sum(s.weights[defined] * s.means[defined]) - s.global_mean) <= 1e-9
        for (lo, hi), w, mu in zip(t.class_ranges(), s.weights, s.means):
            if w > 0:
                assert lo <= mu <= hi - 1


class TestOtsu:
    def test_two_level(self):
        assert otsu_objective(hist_of(0, 0, 255, 255), ThresholdSet.of(128)) == 16256.25

    @pytest.mark.parametrize("t", [(1,), (7,), (8,), (200,), (3, 100, 250)])
    def test_single_level_is_zero(self, t):
        assert otsu_objective(hist_of(7, 7, 7), ThresholdSet(t)) == 0.0

    @given(seeds, ks)
    def test_variance_decomposition(self, seed, k):
        h = random_hist(seed)
        t = random_tset(seed, k)
        total, within = variance_split(h.probs, t.thresholds)
        between = otsu_objective(h, t)
        assert between >= 0
        assert math.isclose(between + within, total, rel_tol=1e-9, abs_tol=1e-9)

    @given(seeds, ks)
    def test_matches_definition(self, seed, k):
        h = random_hist(seed)
        t = random_tset(seed, k)
        assert math.isclose(otsu_objective(h, t), otsu_naive(h.probs, t.thresholds), rel_tol=1e-9, abs_tol=1e-9)


class TestKapur:
    def test_one_point_classes(self):
        assert kapur_objective(hist_of(0, 0, 255, 255), ThresholdSet.of(128)) == 0.0

    def test_four_levels(self):
        assert math.isclose(kapur_objective(hist_of(0, 85, 170, 255), ThresholdSet.of(128)), 2 * math.log(2), rel_tol=1e-12)

    def test_empty_class_gives_full_entropy(self):
        h = hist_of(3, 3, 10, 40, 40, 40)
        p = h.probs[h.probs > 0]
        full = -np.sum(p * np.log(p))
        assert math.isclose(kapur_objective(h, ThresholdSet.of(200)), full, rel_tol=1e-12)

    @given(seeds, ks)
    def test_matches_definition(self, seed, k):
        h = random_hist(seed)
        t = random_tset(seed, k)
        value = kapur_objective(h, t)
        assert value >= 0
        assert math.isclose(value, kapur_naive(h.probs, t.thresholds), rel_tol=1e-9, abs_tol=1e-9)

    @given(seeds, st.integers(1, 255))
    def test_bounded_by_uniform_classes(self, seed, t):
        assert kapur_objective(random_hist(seed), ThresholdSet.of(t)) <= math.log(t) + math.log(256 - t) + 1e-12


@given(seeds, ks)
def test_pixel_permutation_invariance(seed, k):
    rng = np.random.default_rng(seed)
    img = GrayImage(rng.integers(0, 256, (12, 9)).astype(np.uint8))
    shuffled = GrayImage(rng.permutation(img.pixels.ravel()).reshape(9, 12))
    t = random_tset(seed, k)
    a, b = histogram(img), histogram(shuffled)
    assert otsu_objective(a, t) == otsu_objective(b, t)
    assert kapur_objective(a, t) == kapur_objective(b, t)
    np.testing.assert_array_equal(class_stats(a, t).weights, class_stats(b, t).weights)


def test_bilevel_curves_match_definition(rng):
    for seed in range(5):
        h = random_hist(seed)
        otsu, kapur = bilevel_curves(h)
        for t in range(1, 256):
            assert math.isclose(otsu[t - 1], otsu_naive(h.probs, [t]), rel_tol=1e-9, abs_tol=1e-9)
            assert math.isclose(kapur[t - 1], kapur_naive(h.probs, [t]), rel_tol=1e-9, abs_tol=1e-9)


class TestReconstruct:
    def image(self, *pixels):
        return GrayImage(np.array([pixels], np.uint8))

    def test_single_level_classes_reproduce(self):
        img = self.image(10, 10, 200, 200)
        np.testing.assert_array_equal(reconstruct(img, ThresholdSet.of(128)).pixels, img.pixels)

    def test_class_mean(self):
        out = reconstruct(self.image(0, 50, 200, 250), ThresholdSet.of(128), ReconstructionRule.CLASS_MEAN)
        np.testing.assert_array_equal(out.pixels, [[25, 25, 225, 225]])

    def test_lower_boundary(self, rng):
        img = GrayImage(rng.integers(0, 256, (8, 8)).astype(np.uint8))
        out = reconstruct(img, ThresholdSet.of(128), "lower")
        np.testing.assert_array_equal(out.pixels, np.where(img.pixels < 128, 0, 128))

    def test_midpoint(self):
        out = reconstruct(self.image(0, 50, 200, 250), ThresholdSet.of(128), ReconstructionRule.CLASS_MIDPOINT)
        np.testing.assert_array_equal(out.pixels, [[63.5, 63.5, 191.5, 191.5]])

    @given(seeds, ks)
    def test_class_mean_preserves_global_mean(self, seed, k):
        rng = np.random.default_rng(seed)
        img = GrayImage(rng.integers(0, 256, (10, 11)).astype(np.uint8))
        t = random_tset(seed, k)
        out = reconstruct(img, t)
        assert abs(out.pixels.mean() - class_stats(histogram(img), t).global_mean) <= 1e-9


def brute_force(h, k, objective, levels=range(1, 256)):
    """Literal nested loop over all threshold tuples."""
    score = otsu_naive if objective == "otsu" else kapur_naive
    best, best_t = -math.inf, None
    for t in itertools.combinations(levels, k):
        v = score(h.probs, t)
        if v > best:
            best, best_t = v, t
    return best_t, best


class TestExhaustiveSearch:
    def test_constant_curve_picks_first(self):
        t, v = exhaustive_search(hist_of(0, 0, 255, 255), 1, "otsu")
        assert t.thresholds == (1,) and v == 16256.25

    def test_single_level_kapur(self):
        t, v = exhaustive_search(hist_of(9, 9, 9), 1, "kapur")
        assert t.thresholds == (1,) and v == 0.0

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("objective", ["otsu", "kapur"])
    def test_pairs_on_eight_levels(self, seed, objective):
        rng = np.random.default_rng(seed)
        counts = np.zeros(256, np.int64)
        counts[:8] = rng.integers(1, 100, 8)
        h = Histogram(counts)
        t, v = exhaustive_search(h, 2, objective)
        t_bf, v_bf = brute_force(h, 2, objective, range(1, 8))
        assert math.isclose(v, v_bf, rel_tol=1e-9)
        if objective == "otsu":
            # every level is occupied, so splitting a class never lowers the
            # between-class variance and the optimum uses levels 1..7
            assert t.thresholds == t_bf

    @pytest.mark.parametrize("objective", ["otsu", "kapur"])
    def test_k3_on_eight_levels(self, objective):
        counts = np.zeros(256, np.int64)
        counts[:8] = [5, 40, 3, 9, 60, 2, 33, 18]
        h = Histogram(counts)
        t, v = exhaustive_search(h, 3, objective)
        if objective == "otsu":
            t_bf, v_bf = brute_force(h, 3, objective, range(1, 8))
            assert t.thresholds == t_bf and math.isclose(v, v_bf, rel_tol=1e-9)
        else:
            assert v >= brute_force(h, 3, objective, range(1, 8))[1] - 1e-12

    def test_k1_full_range(self):
        h = random_hist(3)
        t, v = exhaustive_search(h, 1, "kapur")
        t_bf, v_bf = brute_force(h, 1, "kapur")
        assert t.thresholds == t_bf and math.isclose(v, v_bf, rel_tol=1e-9)

    @given(seeds, ks)
    def test_beats_random_candidates(self, seed, k):
        h = random_hist(seed)
        rng = np.random.default_rng(seed)
        for objective in ("otsu", "kapur"):
            _, best = exhaustive_search(h, k, objective)
            samples = np.sort(np.array([rng.choice(np.arange(1, 256), k, replace=False) for _ in range(50)]), axis=1)
            assert np.all(best >= evaluate(HistogramTables(h), samples, objective) - 1e-12)

    @pytest.mark.parametrize("k", [0, 4, 10])
    def test_capability(self, k):
        with pytest.raises(CapabilityError):
            exhaustive_search(hist_of(1, 2), k)

    def test_custom_objective(self):
        def class_count(tables, lo, hi):
            return (tables.class_counts(lo, hi) > 0).astype(float)

        register_objective("occupied-classes", class_count)
        try:
            t, v = exhaustive_search(hist_of(10, 20, 30), 2, "occupied-classes")
            assert v == 3 and t.thresholds == (11, 21)
        finally:
            del OBJECTIVES["occupied-classes"]
