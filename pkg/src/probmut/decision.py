"""Graded kill decisions from posterior similarity to the two ideal posteriors.

The ideal "never killed" and "always killed" experiments produce single Beta
posteriors (all bootstrap components coincide). A bagged posterior is
compared to both with the Hellinger distance; the ratio of the two distances
classifies the mutation's effect on an empirical scale and yields a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln

from probmut.errors import DataError, ToleranceError
from probmut.posterior import BaggedPosterior, BetaDist
from probmut.pools import RunConfig
from probmut.quadrature import integrate

# Effect classes in ratio order; index 4 is "negligible".
EFFECT_CLASSES = (
    "very-strong-not-killed",
    "strong-not-killed",
    "medium-not-killed",
    "weak-not-killed",
    "negligible",
    "weak-killed",
    "medium-killed",
    "strong-killed",
    "very-strong-killed",
)

LIKELY_KILLED = "likely-killed"
LIKELY_NOT_KILLED = "likely-not-killed"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EffectScale:
    """Band edges of the empirical effect scale. The not-killed side owns its
    lower edges ([0.82, 0.87) is strong); the killed side mirrors them with
    edges owned by the weaker class ((1.03, 1.09] is weak)."""

    not_killed_edges: tuple[float, ...] = (0.82, 0.87, 0.92, 0.97)
    killed_edges: tuple[float, ...] = (1.03, 1.09, 1.15, 1.22)

    def classify(self, ratio: float) -> str:
        if ratio < 0 or math.isnan(ratio):
            raise DataError(f"similarity ratio must be >= 0 (got {ratio})")
        e = self.not_killed_edges
        if ratio < e[0]:
            return EFFECT_CLASSES[0]
        if ratio < e[1]:
            return EFFECT_CLASSES[1]
        if ratio < e[2]:
            return EFFECT_CLASSES[2]
        if ratio < e[3]:
            return EFFECT_CLASSES[3]
        k = self.killed_edges
        if ratio <= k[0]:
            return EFFECT_CLASSES[4]
        if ratio <= k[1]:
            return EFFECT_CLASSES[5]
        if ratio <= k[2]:
            return EFFECT_CLASSES[6]
        if ratio <= k[3]:
            return EFFECT_CLASSES[7]
        return EFFECT_CLASSES[8]


DEFAULT_SCALE = EffectScale()


@dataclass(frozen=True)
class IdealPosteriors:
    q_not_killed: BetaDist
    q_killed: BetaDist

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "IdealPosteriors":
        return cls(
            q_not_killed=BetaDist(cfg.prior_a, cfg.N + cfg.prior_b),
            q_killed=BetaDist(cfg.N + cfg.prior_a, cfg.prior_b),
        )


@dataclass(frozen=True)
class EffectReport:
    ratio: float
    display_ratio: str
    effect_class: str
    verdict: str
    h_to_not_killed: float
    h_to_killed: float
    diagnostics: dict = field(default_factory=dict, compare=False)


def hellinger_beta(p: BetaDist, q: BetaDist) -> float:
    """Closed-form Hellinger distance between two Beta distributions,
    computed in log space via log-gamma."""
    a1, b1 = p.alpha, p.beta_param
    a2, b2 = q.alpha, q.beta_param
    log_bc = betaln(0.5 * (a1 + a2), 0.5 * (b1 + b2)) - 0.5 * (betaln(a1, b1) + betaln(a2, b2))
    radicand = 1.0 - math.exp(log_bc)
    if radicand < 0.0:
        if radicand < -1e-12:
            raise ToleranceError("Hellinger radicand went negative", radicand, abs(radicand))
        radicand = 0.0
    return math.sqrt(radicand)


def _pdf_callable(d):
    if callable(d):
        return d
    if hasattr(d, "pdf"):
        return d.pdf
    raise DataError(f"expected a density callable or an object with .pdf (got {type(d)!r})")


def hellinger_numeric(p, q, tol: float = 1e-9, max_intervals: int = 4000) -> float:
    """Hellinger distance between two densities on [0, 1] by adaptive
    quadrature.

    Integrates (sqrt(p) - sqrt(q))^2 / 2 rather than 1 - integral(sqrt(p q)),
    which keeps full relative accuracy when the densities nearly coincide.
    Both inputs must integrate to 1 within 1e-6 (checked in the same pass).
    Raises ToleranceError carrying the best estimate if the interval cap is
    hit first.
    """
    p_pdf, q_pdf = _pdf_callable(p), _pdf_callable(q)

    def integrand(x: np.ndarray) -> np.ndarray:
        pv = np.maximum(np.asarray(p_pdf(x), dtype=np.float64), 0.0)
        qv = np.maximum(np.asarray(q_pdf(x), dtype=np.float64), 0.0)
        h2 = 0.5 * (np.sqrt(pv) - np.sqrt(qv)) ** 2
        return np.stack([h2, pv, qv])

    values, _ = integrate(
        integrand,
        abs_tol=np.array([min(tol, 5e-14), 1e-8, 1e-8]),
        rel_tol=np.array([min(tol, 1e-8), 1e-8, 1e-8]),
        max_intervals=max_intervals,
    )
    h2, mass_p, mass_q = (float(v) for v in values)
    if abs(mass_p - 1.0) > 1e-6:
        raise DataError(f"first density integrates to {mass_p!r}, not 1 (within 1e-6)")
    if abs(mass_q - 1.0) > 1e-6:
        raise DataError(f"second density integrates to {mass_q!r}, not 1 (within 1e-6)")
    return math.sqrt(min(max(h2, 0.0), 1.0))


def classify_effect(ratio: float, scale: EffectScale = DEFAULT_SCALE) -> str:
    """Total, monotone step classification of a similarity ratio."""
    return scale.classify(ratio)


def verdict_for(effect_class: str) -> str:
    """likely-killed from strong evidence up; likely-not-killed from strong
    evidence down; inconclusive in between (scored as not killed)."""
    idx = EFFECT_CLASSES.index(effect_class)
    if idx >= EFFECT_CLASSES.index("strong-killed"):
        return LIKELY_KILLED
    if idx <= EFFECT_CLASSES.index("strong-not-killed"):
        return LIKELY_NOT_KILLED
    return INCONCLUSIVE


def _display_ratio(ratio: float) -> str:
    if math.isinf(ratio) or ratio > 2.0:
        return ">2"
    return f"{ratio:.2f}"


def similarity_ratio(
    p: BaggedPosterior, ideals: IdealPosteriors, scale: EffectScale = DEFAULT_SCALE
) -> EffectReport:
    """Distance ratio of the bagged posterior to the two ideal posteriors.

    The mixture itself is the operand; a moment-matched Beta projection is
    reported only as a diagnostic. The raw ratio is retained while the
    display value is capped at ">2".
    """
    h_not = hellinger_numeric(p, ideals.q_not_killed)
    h_kill = hellinger_numeric(p, ideals.q_killed)
    if h_kill == 0.0:
        ratio = math.inf
    else:
        ratio = h_not / h_kill
    effect_class = classify_effect(ratio, scale)
    mm = p.moment_matched()
    return EffectReport(
        ratio=ratio,
        display_ratio=_display_ratio(ratio),
        effect_class=effect_class,
        verdict=verdict_for(effect_class),
        h_to_not_killed=h_not,
        h_to_killed=h_kill,
        diagnostics={
            "moment_matched_alpha": mm.alpha,
            "moment_matched_beta": mm.beta_param,
            "posterior_mean": p.mean(),
            "posterior_variance": p.variance(),
        },
    )


def mutation_score(reports, theta: float) -> float:
    """Fraction of mutations whose raw similarity ratio exceeds theta."""
    reports = list(reports)
    if not reports:
        raise DataError("mutation score needs at least one effect report")
    if theta <= 0:
        raise DataError(f"theta must be > 0 (got {theta})")
    killed = sum(1 for r in reports if r.ratio > theta)
    return killed / len(reports)
