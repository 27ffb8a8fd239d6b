"""Monte-Carlo error of the bagged posterior and the sample-size trade-off.

Replicating the bagging pipeline R times gives Monte-Carlo samples of the
posterior's mean and variance; a delete-1 jackknife over the replicates
yields their standard error, complemented by a normal-critical-value
confidence interval. The trade-off study repeats this over subsampled
populations of increasing size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from probmut.errors import ConfigError
from probmut.mtest import MutationTest
from probmut.pools import InstancePool, RunConfig
from probmut.posterior import bayes_bag
from probmut.rng import Stream


@dataclass(frozen=True)
class JackknifeResult:
    estimate: float
    se: float
    ci_lo: float
    ci_hi: float
    replicates: int


@dataclass(frozen=True)
class MCEReport:
    estimate_mu: float
    se_mu: float
    ci_lo_mu: float
    ci_hi_mu: float
    estimate_var: float
    se_var: float
    ci_lo_var: float
    ci_hi_var: float
    replicates: int


@dataclass(frozen=True)
class TradeoffReport:
    sample_sizes: tuple[int, ...]
    n_pop: int
    cells: dict  # (size, pop_draw) -> MCEReport

    def rows(self) -> list[dict]:
        """Tidy rows, one per (size, pop_draw) cell."""
        out = []
        for (size, draw), cell in sorted(self.cells.items()):
            out.append(
                {
                    "size": size,
                    "pop_draw": draw,
                    "estimate_mu": cell.estimate_mu,
                    "se_mu": cell.se_mu,
                    "ci_lo_mu": cell.ci_lo_mu,
                    "ci_hi_mu": cell.ci_hi_mu,
                    "estimate_var": cell.estimate_var,
                    "se_var": cell.se_var,
                    "ci_lo_var": cell.ci_lo_var,
                    "ci_hi_var": cell.ci_hi_var,
                }
            )
        return out

    def dispersion_by_size(self) -> dict[int, float]:
        """Cross-draw standard deviation of estimate_mu per sample size."""
        out = {}
        for size in self.sample_sizes:
            mus = [self.cells[(size, d)].estimate_mu for d in range(self.n_pop)]
            out[size] = float(np.std(mus))
        return out


def jackknife_error(values, level: float = 0.95) -> JackknifeResult:
    """Delete-1 jackknife of the mean estimator over Monte-Carlo replicates.

    se = sqrt(((R-1)/R) * sum_i (theta_(i) - mean(theta_(.)))^2) with
    theta_(i) the leave-one-out means; the confidence interval uses the
    normal critical value at `level`.
    """
    values = np.asarray(list(values), dtype=np.float64)
    r = len(values)
    if r < 2:
        raise ConfigError(f"jackknife needs at least 2 replicates (got {r})")
    estimate = float(values.mean())
    loo = (values.sum() - values) / (r - 1)
    se = math.sqrt((r - 1) / r * float(((loo - loo.mean()) ** 2).sum()))
    z = float(ndtri(0.5 * (1.0 + level)))
    return JackknifeResult(estimate, se, estimate - z * se, estimate + z * se, r)


def replicate_bagged(
    healthy: InstancePool,
    mutant: InstancePool,
    z: MutationTest,
    cfg: RunConfig,
    n_reps: int,
    stream: Stream,
) -> list[tuple[float, float]]:
    """R independent bagged posteriors; returns their (mean, variance) pairs.
    Replicate r uses substream split(r)."""
    if n_reps < 2:
        raise ConfigError(f"need at least 2 replicates (got {n_reps})")
    pairs = []
    for r in range(n_reps):
        bagged = bayes_bag(healthy, mutant, z, cfg, stream.split(r))
        pairs.append((bagged.mean(), bagged.variance()))
    return pairs


def mce_report(pairs, level: float = 0.95) -> MCEReport:
    mus = [p[0] for p in pairs]
    variances = [p[1] for p in pairs]
    jk_mu = jackknife_error(mus, level)
    jk_var = jackknife_error(variances, level)
    return MCEReport(
        estimate_mu=jk_mu.estimate,
        se_mu=jk_mu.se,
        ci_lo_mu=jk_mu.ci_lo,
        ci_hi_mu=jk_mu.ci_hi,
        estimate_var=jk_var.estimate,
        se_var=jk_var.se,
        ci_lo_var=jk_var.ci_lo,
        ci_hi_var=jk_var.ci_hi,
        replicates=jk_mu.replicates,
    )


def tradeoff_study(
    healthy: InstancePool,
    mutant: InstancePool,
    z: MutationTest,
    cfg: RunConfig,
    sizes,
    n_pop: int,
    n_reps: int,
    stream: Stream,
    level: float = 0.95,
) -> TradeoffReport:
    """MCE across population sizes: for each size, draw `n_pop` subsampled
    populations (without replacement) from each pool and run the replicated
    bagging + jackknife pipeline on each draw."""
    sizes = tuple(int(s) for s in sizes)
    if list(sizes) != sorted(set(sizes)):
        raise ConfigError(f"sample sizes must be strictly increasing (got {sizes})")
    if sizes and sizes[0] < 1:
        raise ConfigError("sample sizes must be >= 1")
    if max(sizes) > min(len(healthy), len(mutant)):
        raise ConfigError(
            f"largest sample size {max(sizes)} exceeds pool sizes "
            f"({len(healthy)}, {len(mutant)})"
        )
    if n_pop < 1:
        raise ConfigError(f"n_pop must be >= 1 (got {n_pop})")

    cells = {}
    for si, size in enumerate(sizes):
        for draw in range(n_pop):
            sub = stream.split(si).split(draw)
            gen = sub.split(0).generator()
            idx_h = gen.choice(len(healthy), size=size, replace=False)
            idx_m = gen.choice(len(mutant), size=size, replace=False)
            h_sub = healthy.subset(idx_h, label=f"{healthy.label}-s{size}d{draw}")
            m_sub = mutant.subset(idx_m, label=f"{mutant.label}-s{size}d{draw}")
            pairs = replicate_bagged(h_sub, m_sub, z, cfg, n_reps, sub.split(1))
            cells[(size, draw)] = mce_report(pairs, level)
    return TradeoffReport(sample_sizes=sizes, n_pop=n_pop, cells=cells)
