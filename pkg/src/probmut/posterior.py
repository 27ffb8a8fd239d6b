"""Beta posteriors over the kill probability and their bagged mixtures.

Repeated sampled mutation tests form a Binomial experiment whose conjugate
Beta posterior is ``Beta(prior_a + k, N - k + prior_b)``. Bootstrap
resampling the instance pools B times and mixing the per-resample posteriors
with equal weights yields the bagged posterior used for all downstream
decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, betaln, xlogy

from probmut.errors import ConfigError, DataError
from probmut.kernels import backend_name, statistical_kills
from probmut.mtest import POINTWISE_DELTA, STATISTICAL, MutationTest, critical_t
from probmut.pools import InstancePool, RunConfig
from probmut.rng import Stream


@dataclass(frozen=True)
class TrialOutcome:
    k: int
    N: int

    def __post_init__(self):
        if not 0 <= self.k <= self.N:
            raise DataError(f"invalid trial outcome k={self.k}, N={self.N}")


@dataclass(frozen=True)
class BetaDist:
    alpha: float
    beta_param: float

    def __post_init__(self):
        a, b = self.alpha, self.beta_param
        if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
            raise DataError(f"Beta parameters must be finite and positive (got {a}, {b})")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta_param)

    @property
    def variance(self) -> float:
        a, b = self.alpha, self.beta_param
        s = a + b
        return a * b / (s * s * (s + 1.0))

    def logpdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        a, b = self.alpha, self.beta_param
        return xlogy(a - 1.0, x) + xlogy(b - 1.0, 1.0 - x) - betaln(a, b)

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def cdf(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        return betainc(self.alpha, self.beta_param, x)


@dataclass(frozen=True)
class BaggedPosterior:
    """Equal-weight mixture of per-bootstrap Beta posteriors."""

    components: tuple[BetaDist, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.components:
            raise DataError("bagged posterior needs at least one component")

    def __len__(self) -> int:
        return len(self.components)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([c.alpha for c in self.components])

    @property
    def betas(self) -> np.ndarray:
        return np.array([c.beta_param for c in self.components])

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros_like(x, dtype=np.float64)
        for c in self.components:
            acc += c.pdf(x)
        return acc / len(self.components)

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        acc = np.zeros_like(x, dtype=np.float64)
        for c in self.components:
            acc += c.cdf(x)
        return acc / len(self.components)

    def mean(self) -> float:
        return float(np.mean([c.mean for c in self.components]))

    def variance(self) -> float:
        # mixture identity: expected component variance + variance of means
        means = np.array([c.mean for c in self.components])
        variances = np.array([c.variance for c in self.components])
        return float(variances.mean() + means.var())

    def moment_matched(self) -> BetaDist:
        """Single Beta with the mixture's mean and variance (diagnostic only)."""
        m, v = self.mean(), self.variance()
        common = m * (1.0 - m) / v - 1.0
        return BetaDist(m * common, (1.0 - m) * common)


@dataclass(frozen=True)
class CredibleInterval:
    lo: float
    hi: float
    level: float
    kind: str
    multimodal: bool = False

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise DataError(f"credible interval has lo {self.lo} > hi {self.hi}")


# --- trials ------------------------------------------------------------------


def _sample_index_rows(gen: np.random.Generator, n_trials: int, pool_size: int, take: int) -> np.ndarray:
    """`n_trials` independent uniform subsets of `take` out of `pool_size`,
    drawn without replacement (smallest-key selection on fresh uniforms)."""
    keys = gen.random((n_trials, pool_size))
    if take == pool_size:
        return np.argsort(keys, axis=1)
    return np.argpartition(keys, take - 1, axis=1)[:, :take].astype(np.intp)


def _trials_on_metrics(
    xh: np.ndarray, xm: np.ndarray, z: MutationTest, cfg: RunConfig, gen: np.random.Generator
) -> int:
    idx_h = _sample_index_rows(gen, cfg.N, len(xh), cfg.n1)
    idx_m = _sample_index_rows(gen, cfg.N, len(xm), cfg.n2)
    if z.kind == POINTWISE_DELTA:
        if cfg.n1 != 1 or cfg.n2 != 1:
            raise ConfigError("pointwise-delta requires n1 = n2 = 1")
        diffs = np.abs(xh[idx_h[:, 0]] - xm[idx_m[:, 0]])
        return int((diffs > z.delta_tolerance).sum())
    t_crit = critical_t(z.p_threshold, cfg.n1 + cfg.n2 - 2)
    kills = statistical_kills(
        xh, xm, idx_h, idx_m, t_crit * t_crit, z.effect_threshold * z.effect_threshold
    )
    return int(kills.sum())


def run_trials(
    healthy: InstancePool, mutant: InstancePool, z: MutationTest, cfg: RunConfig, stream: Stream
) -> TrialOutcome:
    """N independent trials, each comparing n1 healthy vs n2 mutant instances
    sampled uniformly without replacement; k counts "mutant" verdicts."""
    cfg.check_pools(healthy, mutant)
    if z.kind == STATISTICAL and (cfg.n1 < 2 or cfg.n2 < 2):
        raise ConfigError("statistical test requires n1, n2 >= 2")
    k = _trials_on_metrics(healthy.metrics, mutant.metrics, z, cfg, stream.generator())
    return TrialOutcome(k=k, N=cfg.N)


def beta_posterior(t: TrialOutcome, prior_a: float = 1.0, prior_b: float = 1.0) -> BetaDist:
    return BetaDist(prior_a + t.k, t.N - t.k + prior_b)


def bayes_bag(
    healthy: InstancePool, mutant: InstancePool, z: MutationTest, cfg: RunConfig, stream: Stream
) -> BaggedPosterior:
    """B bootstrap resamples of each pool (size preserved, with replacement),
    each resample run through `run_trials`; the per-resample posteriors form
    an equal-weight mixture.

    Substream layout: bootstrap b draws its resamples from split(b).split(0)
    and its trials from split(b).split(1), so iterations are order-free.
    """
    cfg.check_pools(healthy, mutant)
    if z.kind == STATISTICAL and (cfg.n1 < 2 or cfg.n2 < 2):
        raise ConfigError("statistical test requires n1, n2 >= 2")
    xh, xm = healthy.metrics, mutant.metrics
    components = []
    for b in range(cfg.B):
        boot = stream.split(b)
        gen = boot.split(0).generator()
        xh_b = xh[gen.integers(0, len(xh), size=len(xh))]
        xm_b = xm[gen.integers(0, len(xm), size=len(xm))]
        k = _trials_on_metrics(xh_b, xm_b, z, cfg, boot.split(1).generator())
        components.append(beta_posterior(TrialOutcome(k, cfg.N), cfg.prior_a, cfg.prior_b))
    provenance = {
        "master_seed": stream.master_seed,
        "stream_path": list(stream.path),
        "healthy": healthy.label,
        "mutant": mutant.label,
        "config": cfg.snapshot(),
        "kernel": backend_name(),
    }
    return BaggedPosterior(components=tuple(components), provenance=provenance)


# --- point estimates ---------------------------------------------------------


def mmse(p: BaggedPosterior) -> float:
    """Posterior mean of the mixture (minimum mean squared error estimate)."""
    return p.mean()


_GRID_STEP = 1e-4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def map_estimate(p: BaggedPosterior) -> float:
    """Argmax of the mixture density on [0, 1]: dense grid scan refined by
    golden-section search. Plateaus resolve to the leftmost maximizer.

    Endpoints are evaluated directly when all component parameters are >= 1
    (bounded density); otherwise the scan is guarded away from {0, 1}.
    """
    guarded = any(c.alpha < 1.0 or c.beta_param < 1.0 for c in p.components)
    eps = 1e-9 if guarded else 0.0
    grid = np.linspace(eps, 1.0 - eps, int(round(1.0 / _GRID_STEP)) + 1)
    dens = p.pdf(grid)
    best = int(np.argmax(dens))
    peak = dens[best]
    # plateau: neighbouring grid point reaches the max -> leftmost tie-break
    ties = np.flatnonzero(np.abs(dens - peak) <= 1e-12 * max(peak, 1.0))
    if len(ties) > 1 and ties[0] + 1 in ties:
        return float(grid[ties[0]])
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    return _golden_max(lambda x: float(p.pdf(np.array([x]))[0]), float(lo), float(hi))


# --- credible intervals --------------------------------------------------------


def _invert_cdf(p: BaggedPosterior, q: float) -> float:
    """Bisection on the analytic mixture CDF (monotone on [0, 1])."""
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(p.cdf(mid)) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _is_multimodal(p: BaggedPosterior) -> bool:
    xs = np.linspace(0.0, 1.0, 1001)
    d = p.pdf(xs)
    rising = d[1:] > d[:-1] + 1e-12 * np.maximum(d[1:], 1.0)
    falling = d[1:] < d[:-1] - 1e-12 * np.maximum(d[1:], 1.0)
    peaks = 0
    state = "rise"
    for r, f in zip(rising, falling):
        if state == "rise" and f:
            peaks += 1
            state = "fall"
        elif state == "fall" and r:
            state = "rise"
    if state == "rise":
        peaks += 1  # density still rising at x = 1
    return peaks > 1


def credible_interval(p: BaggedPosterior, level: float, kind: str = "equal-tailed") -> CredibleInterval:
    """Interval holding `level` posterior mass.

    equal-tailed inverts the mixture CDF at the two tail quantiles; hdi
    minimizes width at fixed mass by sweeping lower endpoints (multimodal
    mixtures get the smallest single covering interval, flagged);
    mean-centered grows symmetrically around the posterior mean.
    """
    if not 0.0 < level < 1.0:
        raise ConfigError(f"credible level must be in (0, 1) (got {level})")
    if kind == "equal-tailed":
        tail = 0.5 * (1.0 - level)
        return CredibleInterval(_invert_cdf(p, tail), _invert_cdf(p, 1.0 - tail), level, kind)
    if kind == "hdi":
        multimodal = _is_multimodal(p)
        lo_max = _invert_cdf(p, 1.0 - level)

        def width(lo: float) -> float:
            return _hi_for(lo) - lo

        def _hi_for(lo: float) -> float:
            target = float(p.cdf(lo)) + level
            return _invert_cdf(p, target)

        sweep = np.linspace(0.0, lo_max, 512)
        widths = [width(float(lo)) for lo in sweep]
        i = int(np.argmin(widths))
        bracket_lo = float(sweep[max(i - 1, 0)])
        bracket_hi = float(sweep[min(i + 1, len(sweep) - 1)])
        best_lo = _golden_max(lambda lo: -width(lo), bracket_lo, bracket_hi)
        return CredibleInterval(best_lo, _hi_for(best_lo), level, kind, multimodal=multimodal)
    if kind == "mean-centered":
        center = p.mean()

        def mass(h: float) -> float:
            lo = max(0.0, center - h)
            hi = min(1.0, center + h)
            return float(p.cdf(hi)) - float(p.cdf(lo))

        lo_h, hi_h = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo_h + hi_h)
            if mass(mid) < level:
                lo_h = mid
            else:
                hi_h = mid
        h = 0.5 * (lo_h + hi_h)
        return CredibleInterval(max(0.0, center - h), min(1.0, center + h), level, kind)
    raise ConfigError(f"unknown credible interval kind {kind!r}")


def density_grid(p: BaggedPosterior, points: int = 1001) -> tuple[np.ndarray, np.ndarray]:
    """Uniform (x, density) grid over [0, 1] for export and plotting."""
    xs = np.linspace(0.0, 1.0, points)
    return xs, p.pdf(xs)
