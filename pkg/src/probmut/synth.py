"""Synthetic instance pools with known ground truth, and the brute-force
kill-probability oracle used to validate the engine at desk scale.

The oracle is intentionally a second, independent implementation of the
trial loop (scipy's reference t-test, permutation-based sampling, no
bootstrap, no posterior) so correlated bugs in the engine cannot hide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from probmut.errors import ConfigError, DataError
from probmut.mtest import POINTWISE_DELTA, MutationTest
from probmut.pools import InstancePool, InstanceRecord, PoolSchema, RunConfig
from probmut.rng import Stream

TRUNCATED_NORMAL = "truncated-normal"
PER_INPUT_BERNOULLI = "per-input-bernoulli"

_REJECTION_CAP = 1000  # batches of `size` draws before giving up


@dataclass(frozen=True)
class PopulationSpec:
    size: int
    law: str = TRUNCATED_NORMAL
    mu: float = 0.5
    sigma: float = 0.1
    lo: float | None = None
    hi: float | None = None
    p: float = 0.5
    t_len: int = 100
    label: str = "synthetic"
    mutation_operator: str = "identity"
    magnitude: str | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ConfigError(f"population size must be >= 1 (got {self.size})")
        if self.law not in (TRUNCATED_NORMAL, PER_INPUT_BERNOULLI):
            raise ConfigError(f"unknown metric law {self.law!r}")
        if self.law == TRUNCATED_NORMAL:
            if self.sigma <= 0:
                raise ConfigError(f"sigma must be > 0 (got {self.sigma})")
            if self.lo is not None and self.hi is not None and not self.lo < self.hi:
                raise ConfigError(f"truncation range [{self.lo}, {self.hi}] is empty")
        else:
            if not 0.0 <= self.p <= 1.0:
                raise ConfigError(f"success probability must be in [0, 1] (got {self.p})")
            if self.t_len < 1:
                raise ConfigError(f"t_len must be >= 1 (got {self.t_len})")


def gen_population(
    spec: PopulationSpec, stream: Stream, schema: PoolSchema | None = None
) -> InstancePool:
    """Draw `size` i.i.d. instance records under the spec's metric law.

    Truncated normals are drawn by rejection against the declared range
    (defaulting to the schema's metric range); per-input Bernoulli fills an
    outcomes vector and derives the metric from it.
    """
    schema = schema or PoolSchema()
    gen = stream.generator()

    if spec.law == TRUNCATED_NORMAL:
        lo = schema.lo if spec.lo is None else spec.lo
        hi = schema.hi if spec.hi is None else spec.hi
        metrics: list[float] = []
        for _ in range(_REJECTION_CAP):
            draw = gen.normal(spec.mu, spec.sigma, size=spec.size)
            metrics.extend(draw[(draw >= lo) & (draw <= hi)].tolist())
            if len(metrics) >= spec.size:
                break
        else:
            raise DataError(
                f"rejection sampling failed: <{spec.size} of {_REJECTION_CAP * spec.size} "
                f"draws landed in [{lo}, {hi}]"
            )
        records = tuple(
            InstanceRecord(f"{spec.label}-{i:04d}", i, metrics[i]) for i in range(spec.size)
        )
    else:
        outcomes = (gen.random((spec.size, spec.t_len)) < spec.p).astype(int)
        records = tuple(
            InstanceRecord(
                f"{spec.label}-{i:04d}",
                i,
                float(outcomes[i].mean()),
                tuple(int(v) for v in outcomes[i]),
            )
            for i in range(spec.size)
        )

    return InstancePool(
        label=spec.label,
        mutation_operator=spec.mutation_operator,
        magnitude=spec.magnitude,
        records=records,
        schema=schema,
    )


def brute_force_kill_prob(
    healthy: InstancePool,
    mutant: InstancePool,
    z: MutationTest,
    cfg: RunConfig,
    n_mc: int,
    stream: Stream,
    chunk: int = 20000,
) -> tuple[float, float]:
    """High-N Monte-Carlo estimate of the kill probability with binomial
    standard error. Independent of the engine's trial path by construction."""
    if n_mc < 10_000:
        raise ConfigError(f"oracle needs n_mc >= 10000 (got {n_mc})")
    cfg.check_pools(healthy, mutant)
    xh, xm = healthy.metrics, mutant.metrics
    gen = stream.generator()
    kills = 0
    done = 0
    while done < n_mc:
        n = min(chunk, n_mc - done)
        rows_h = np.broadcast_to(np.arange(len(xh)), (n, len(xh)))
        rows_m = np.broadcast_to(np.arange(len(xm)), (n, len(xm)))
        take_h = gen.permuted(rows_h, axis=1)[:, : cfg.n1]
        take_m = gen.permuted(rows_m, axis=1)[:, : cfg.n2]
        gx = xh[take_h]
        gy = xm[take_m]
        if z.kind == POINTWISE_DELTA:
            if cfg.n1 != 1 or cfg.n2 != 1:
                raise ConfigError("pointwise-delta requires n1 = n2 = 1")
            kills += int((np.abs(gx[:, 0] - gy[:, 0]) > z.delta_tolerance).sum())
        else:
            kills += _reference_statistical_kills(gx, gy, z)
        done += n
    estimate = kills / n_mc
    se = math.sqrt(estimate * (1.0 - estimate) / n_mc)
    return estimate, se


def _reference_statistical_kills(gx: np.ndarray, gy: np.ndarray, z: MutationTest) -> int:
    n1, n2 = gx.shape[1], gy.shape[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        result = stats.ttest_ind(gx, gy, axis=1, equal_var=True)
        p = np.nan_to_num(result.pvalue, nan=1.0)
        sp = np.sqrt(((n1 - 1) * gx.var(axis=1, ddof=1) + (n2 - 1) * gy.var(axis=1, ddof=1)) / (n1 + n2 - 2))
        diff = gx.mean(axis=1) - gy.mean(axis=1)
        d = np.where(sp > 0, np.abs(diff) / np.where(sp > 0, sp, 1.0), np.inf)
    degenerate_kill = (sp == 0) & (diff != 0)
    regular_kill = (sp > 0) & (p < z.p_threshold) & (d >= z.effect_threshold)
    return int((degenerate_kill | regular_kill).sum())
