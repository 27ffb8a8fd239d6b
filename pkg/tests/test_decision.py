import math

import numpy as np
import pytest

from probmut import (
    BaggedPosterior,
    BetaDist,
    DataError,
    EffectReport,
    MutationTest,
    RunConfig,
    bayes_bag,
    classify_effect,
    hellinger_beta,
    hellinger_numeric,
    mutation_score,
    similarity_ratio,
)
from probmut.decision import (
    EFFECT_CLASSES,
    IdealPosteriors,
    verdict_for,
)
from probmut.rng import Stream
from tests.conftest import synthetic_pool

HAND_H_11_21 = math.sqrt(1.0 - (2.0 / 3.0) / math.sqrt(0.5))  # B(1.5,1)=2/3, B(2,1)=1/2


def bag_of(*params):
    return BaggedPosterior(components=tuple(BetaDist(a, b) for a, b in params))


class TestHellingerBeta:
    def test_identity_is_zero(self):
        for a, b in [(1, 1), (2, 7), (101, 1), (46, 56)]:
            assert hellinger_beta(BetaDist(a, b), BetaDist(a, b)) == 0.0

    def test_hand_oracle(self):
        assert hellinger_beta(BetaDist(1, 1), BetaDist(2, 1)) == pytest.approx(
            HAND_H_11_21, abs=1e-12
        )

    def test_near_disjoint_supports(self):
        h = hellinger_beta(BetaDist(1, 101), BetaDist(101, 1))
        assert h > 1 - 1e-6
        assert h <= 1.0

    def test_symmetry_exact(self, rng):
        for _ in range(200):
            a1, b1, a2, b2 = rng.uniform(1, 200, 4)
            p, q = BetaDist(a1, b1), BetaDist(a2, b2)
            assert hellinger_beta(p, q) == hellinger_beta(q, p)

    def test_range_and_separation(self, rng):
        # zero exactly on the diagonal, strictly positive off it
        for _ in range(200):
            a1, b1, a2, b2 = rng.uniform(1, 200, 4)
            h = hellinger_beta(BetaDist(a1, b1), BetaDist(a2, b2))
            assert 0.0 <= h <= 1.0
            if abs(a1 - a2) > 1e-3 or abs(b1 - b2) > 1e-3:
                assert h > 1e-9
        assert hellinger_beta(BetaDist(2, 2), BetaDist(2.5, 2)) > 1e-3


class TestHellingerNumeric:
    def test_uniform_vs_uniform(self):
        assert hellinger_numeric(BetaDist(1, 1), BetaDist(1, 1)) == 0.0

    def test_duplicate_component_mixture_vs_single(self):
        mix = bag_of((2, 2), (2, 2))
        assert hellinger_numeric(mix, BetaDist(2, 2)) < 1e-12

    def test_agrees_with_closed_form(self, rng):
        for _ in range(50):
            a1, b1, a2, b2 = rng.uniform(1, 200, 4)
            p, q = BetaDist(a1, b1), BetaDist(a2, b2)
            assert hellinger_numeric(p, q) == pytest.approx(hellinger_beta(p, q), abs=1e-8)

    def test_mixture_operand(self):
        mix = bag_of((5, 5), (10, 2))
        h = hellinger_numeric(mix, BetaDist(7, 4))
        assert 0.0 < h < 1.0

    def test_unnormalized_density_rejected(self):
        with pytest.raises(DataError, match="integrates"):
            hellinger_numeric(lambda x: 2 * np.ones_like(x), BetaDist(1, 1))

    def test_accepts_plain_callables(self):
        uniform = lambda x: np.ones_like(x)  # noqa: E731
        assert hellinger_numeric(uniform, uniform) == 0.0


class TestClassifyEffect:
    @pytest.mark.parametrize(
        "ratio,expected",
        [
            (0.72, "very-strong-not-killed"),
            (0.91, "medium-not-killed"),
            (0.95, "weak-not-killed"),
            (1.00, "negligible"),
            (1.05, "weak-killed"),
            (2.5, "very-strong-killed"),
        ],
    )
    def test_reported_pairs(self, ratio, expected):
        assert classify_effect(ratio) == expected

    @pytest.mark.parametrize(
        "edge,expected",
        [
            (0.82, "strong-not-killed"),
            (0.87, "medium-not-killed"),
            (0.92, "weak-not-killed"),
            (0.97, "negligible"),
            (1.03, "negligible"),
            (1.09, "weak-killed"),
            (1.15, "medium-killed"),
            (1.22, "strong-killed"),
        ],
    )
    def test_band_edge_ownership(self, edge, expected):
        assert classify_effect(edge) == expected

    def test_monotone_step_function(self):
        ratios = np.linspace(0.0, 3.0, 3001)
        indices = [EFFECT_CLASSES.index(classify_effect(float(r))) for r in ratios]
        assert all(a <= b for a, b in zip(indices, indices[1:]))

    def test_total_on_extremes(self):
        assert classify_effect(0.0) == "very-strong-not-killed"
        assert classify_effect(math.inf) == "very-strong-killed"
        with pytest.raises(DataError):
            classify_effect(-0.1)


class TestVerdictPolicy:
    def test_thresholds(self):
        assert verdict_for("very-strong-killed") == "likely-killed"
        assert verdict_for("strong-killed") == "likely-killed"
        assert verdict_for("medium-killed") == "inconclusive"
        assert verdict_for("negligible") == "inconclusive"
        assert verdict_for("medium-not-killed") == "inconclusive"
        assert verdict_for("strong-not-killed") == "likely-not-killed"
        assert verdict_for("very-strong-not-killed") == "likely-not-killed"


class TestSimilarityRatio:
    def test_equal_to_ideal_not_killed(self):
        cfg = RunConfig(master_seed=1)
        ideals = IdealPosteriors.from_config(cfg)
        bag = bag_of((cfg.prior_a, cfg.N + cfg.prior_b))
        report = similarity_ratio(bag, ideals)
        assert report.ratio == 0.0
        assert report.effect_class == "very-strong-not-killed"
        assert report.verdict == "likely-not-killed"

    def test_equal_to_ideal_killed(self):
        cfg = RunConfig(master_seed=1)
        ideals = IdealPosteriors.from_config(cfg)
        bag = bag_of((cfg.N + cfg.prior_a, cfg.prior_b))
        report = similarity_ratio(bag, ideals)
        assert math.isinf(report.ratio)
        assert report.display_ratio == ">2"
        assert report.effect_class == "very-strong-killed"
        assert report.verdict == "likely-killed"

    def test_extreme_mutant_behavior(self):
        cfg = RunConfig(master_seed=41)
        healthy = synthetic_pool(0.0, "h", 0, size=200)
        mutant = synthetic_pool(10.0, "m", 1, size=200)
        bag = bayes_bag(healthy, mutant, MutationTest(), cfg, Stream(41))
        report = similarity_ratio(bag, IdealPosteriors.from_config(cfg))
        assert report.ratio > 2
        assert report.display_ratio == ">2"
        assert report.verdict == "likely-killed"

    def test_identity_split_behavior(self):
        cfg = RunConfig(master_seed=43)
        healthy = synthetic_pool(0.0, "h", 0, size=200)
        a, b = healthy.split_sorted_halves()
        bag = bayes_bag(a, b, MutationTest(), cfg, Stream(43))
        report = similarity_ratio(bag, IdealPosteriors.from_config(cfg))
        assert report.ratio < 0.97
        assert report.verdict in {"likely-not-killed", "inconclusive"}

    def test_diagnostics_moment_matched(self):
        cfg = RunConfig(master_seed=1)
        bag = bag_of((46, 56), (30, 70))
        report = similarity_ratio(bag, IdealPosteriors.from_config(cfg))
        assert report.diagnostics["moment_matched_alpha"] > 0
        assert report.diagnostics["posterior_mean"] == pytest.approx(bag.mean())

    def test_ideal_posterior_means_bracket_half(self):
        ideals = IdealPosteriors.from_config(RunConfig(master_seed=1))
        assert ideals.q_not_killed.mean < 0.5 < ideals.q_killed.mean


def _report(ratio):
    return EffectReport(
        ratio=ratio,
        display_ratio=">2" if ratio > 2 else f"{ratio:.2f}",
        effect_class=classify_effect(ratio),
        verdict=verdict_for(classify_effect(ratio)),
        h_to_not_killed=0.5,
        h_to_killed=0.5,
    )


class TestMutationScore:
    def test_basic_fraction(self):
        reports = [_report(r) for r in (2.5, 1.0, 0.9)]
        assert mutation_score(reports, 1.15) == pytest.approx(1 / 3)

    def test_all_above(self):
        assert mutation_score([_report(r) for r in (1.2, 3.0)], 1.15) == 1.0

    def test_reported_trd_row(self):
        # ratios 0.91, 1.00, 1.00, 1.05 and one ">2" entry at default theta
        reports = [_report(r) for r in (0.91, 1.00, 1.00, 1.05, 2.5)]
        assert mutation_score(reports, 1.15) == 0.2

    def test_order_invariance(self):
        ratios = [0.91, 1.00, 1.00, 1.05, 2.5]
        forward = mutation_score([_report(r) for r in ratios], 1.15)
        backward = mutation_score([_report(r) for r in reversed(ratios)], 1.15)
        assert forward == backward

    def test_infinite_ratio_counts(self):
        assert mutation_score([_report(math.inf)], 1.15) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            mutation_score([], 1.15)

    def test_threshold_is_strict(self):
        assert mutation_score([_report(1.15)], 1.15) == 0.0
