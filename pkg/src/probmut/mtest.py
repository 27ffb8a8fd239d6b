"""Pluggable mutation-test functions mapping (healthy sample, mutant sample) -> {0, 1}.

The statistical kind declares a mutant killed when a Gaussian identity-link
linear model of metric on a group indicator — algebraically the pooled-variance
two-sample t-test — is significant AND the |Cohen's d| effect size clears a
threshold. The pointwise-delta kind compares two single instances directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaincinv

from probmut.errors import ConfigError

STATISTICAL = "statistical"
POINTWISE_DELTA = "pointwise-delta"


@dataclass(frozen=True)
class MutationTest:
    kind: str = STATISTICAL
    p_threshold: float = 0.05
    effect_threshold: float = 0.5
    delta_tolerance: float = 1e-12

    def __post_init__(self):
        if self.kind not in (STATISTICAL, POINTWISE_DELTA):
            raise ConfigError(f"unknown mutation test kind {self.kind!r}")
        if self.p_threshold <= 0 or self.effect_threshold <= 0 or self.delta_tolerance <= 0:
            raise ConfigError("mutation test thresholds must be strictly positive")


@dataclass(frozen=True)
class TestVerdict:
    killed: bool
    p_value: float | None
    effect_size: float | None
    degenerate: bool = False


def _as_metrics(sample) -> np.ndarray:
    values = [r.metric if hasattr(r, "metric") else float(r) for r in sample]
    return np.asarray(values, dtype=np.float64)


def _pooled_stats(x: np.ndarray, y: np.ndarray) -> tuple[float, float, int]:
    """(mean difference, pooled sd, degrees of freedom); sample variances
    use the n-1 denominator."""
    n1, n2 = len(x), len(y)
    mx, my = x.mean(), y.mean()
    ssx = float(((x - mx) ** 2).sum())
    ssy = float(((y - my) ** 2).sum())
    df = n1 + n2 - 2
    sp = math.sqrt((ssx + ssy) / df)
    return float(mx - my), sp, df


def _check_sizes(x: np.ndarray, y: np.ndarray) -> None:
    if len(x) < 2 or len(y) < 2:
        raise ConfigError(f"need at least 2 values per sample (got {len(x)} and {len(y)})")


def cohens_d(x, y) -> float:
    """Standardized mean difference with pooled sd.

    Zero pooled variance degenerates: equal means give 0, unequal means give
    a signed infinity (the effect threshold is then trivially met).
    """
    x, y = _as_metrics(x), _as_metrics(y)
    _check_sizes(x, y)
    diff, sp, _ = _pooled_stats(x, y)
    if sp == 0.0:
        if diff == 0.0:
            return 0.0
        return math.copysign(math.inf, diff)
    return diff / sp


def student_t_sf2(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t via the regularized
    incomplete beta function: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return float(betainc(df / 2.0, 0.5, x))


def critical_t(p_threshold: float, df: int) -> float:
    """|t| above which the two-sided p-value falls strictly below p_threshold."""
    x = float(betaincinv(df / 2.0, 0.5, p_threshold))
    return math.sqrt(df * (1.0 - x) / x)


def two_sample_p_value(x, y) -> float:
    """Two-sided p-value of the group coefficient in the pooled-variance
    linear model (exact Student-t CDF, df = |x|+|y|-2)."""
    x, y = _as_metrics(x), _as_metrics(y)
    _check_sizes(x, y)
    diff, sp, df = _pooled_stats(x, y)
    if sp == 0.0:
        return 1.0 if diff == 0.0 else 0.0
    t = diff / (sp * math.sqrt(1.0 / len(x) + 1.0 / len(y)))
    return student_t_sf2(t, df)


def run_test(z: MutationTest, healthy_sample, mutant_sample) -> TestVerdict:
    """Apply the mutation test to one pair of samples. Pure: same samples,
    same verdict, always."""
    x, y = _as_metrics(healthy_sample), _as_metrics(mutant_sample)
    if z.kind == POINTWISE_DELTA:
        if len(x) != 1 or len(y) != 1:
            raise ConfigError(
                f"pointwise-delta requires single-instance samples (got {len(x)} and {len(y)})"
            )
        return TestVerdict(killed=bool(abs(x[0] - y[0]) > z.delta_tolerance), p_value=None, effect_size=None)

    _check_sizes(x, y)
    diff, sp, df = _pooled_stats(x, y)
    if sp == 0.0:
        if diff == 0.0:
            return TestVerdict(killed=False, p_value=1.0, effect_size=0.0)
        return TestVerdict(
            killed=True, p_value=0.0, effect_size=math.copysign(math.inf, diff), degenerate=True
        )
    d = diff / sp
    t = d / math.sqrt(1.0 / len(x) + 1.0 / len(y))
    p = student_t_sf2(t, df)
    killed = p < z.p_threshold and abs(d) >= z.effect_threshold
    return TestVerdict(killed=killed, p_value=p, effect_size=d)
