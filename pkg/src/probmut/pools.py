"""Data model and ingestion for instance evaluation records and run configuration.

Pool files are CSV with header ``instance_id,seed,metric[,o_0,...,o_{T-1}]``.
Outcomes columns are all-or-none per file; when present, each ``o_i`` holds a
binary per-test-input correctness value and all rows share the same length.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from probmut.errors import ConfigError, DataError

_METRIC_KIND_DEFAULTS = {
    # kind: (lo, hi, higher_is_better)
    "accuracy": (0.0, 1.0, True),
    "error": (0.0, math.inf, False),
    "angle": (0.0, math.inf, False),
    "custom": (-math.inf, math.inf, True),
}

_OUTCOME_COL = re.compile(r"^o_(\d+)$")


@dataclass(frozen=True)
class PoolSchema:
    """Declared metric semantics for a pool file; never inferred from data."""

    metric_kind: str = "accuracy"
    lo: float | None = None
    hi: float | None = None
    higher_is_better: bool | None = None

    def __post_init__(self):
        if self.metric_kind not in _METRIC_KIND_DEFAULTS:
            raise ConfigError(
                f"unknown metric kind {self.metric_kind!r}; expected one of "
                f"{sorted(_METRIC_KIND_DEFAULTS)}"
            )
        lo, hi, hib = _METRIC_KIND_DEFAULTS[self.metric_kind]
        if self.lo is None:
            object.__setattr__(self, "lo", lo)
        if self.hi is None:
            object.__setattr__(self, "hi", hi)
        if self.higher_is_better is None:
            object.__setattr__(self, "higher_is_better", hib)
        if not self.lo < self.hi:
            raise ConfigError(f"metric range [{self.lo}, {self.hi}] is empty")


@dataclass(frozen=True)
class InstanceRecord:
    instance_id: str
    seed: int | None
    metric: float
    outcomes: tuple[int, ...] | None = None


@dataclass(frozen=True)
class InstancePool:
    """A validated, immutable population of trained-instance evaluations."""

    label: str
    mutation_operator: str
    magnitude: str | None
    records: tuple[InstanceRecord, ...]
    schema: PoolSchema = field(default_factory=PoolSchema)

    def __post_init__(self):
        _validate_records(self.records, self.schema)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def metrics(self) -> np.ndarray:
        return np.array([r.metric for r in self.records], dtype=np.float64)

    @property
    def is_identity(self) -> bool:
        return self.mutation_operator == "identity"

    def subset(self, indices, label: str | None = None) -> "InstancePool":
        """New pool holding the records at `indices` (order preserved)."""
        recs = tuple(self.records[int(i)] for i in indices)
        return replace(self, records=recs, label=label or self.label)

    def split_sorted_halves(self) -> tuple["InstancePool", "InstancePool"]:
        """Two disjoint halves, assigned by sorted instance_id (documented
        identity-check protocol). The first half gets the extra record when
        the pool size is odd."""
        order = sorted(range(len(self.records)), key=lambda i: self.records[i].instance_id)
        cut = (len(order) + 1) // 2
        a = self.subset(order[:cut], label=f"{self.label}-half-a")
        b = self.subset(order[cut:], label=f"{self.label}-half-b")
        return a, b


def _validate_records(records, schema: PoolSchema) -> None:
    if not records:
        raise DataError("empty pool")
    seen: set[str] = set()
    out_len: int | None = None
    for row, rec in enumerate(records, start=1):
        if not rec.instance_id:
            raise DataError(f"record {row}: blank instance_id")
        if rec.instance_id in seen:
            raise DataError(f"record {row}: duplicate instance_id {rec.instance_id!r}")
        seen.add(rec.instance_id)
        if not math.isfinite(rec.metric):
            raise DataError(f"record {row} ({rec.instance_id}): non-finite metric {rec.metric!r}")
        if not (schema.lo <= rec.metric <= schema.hi):
            raise DataError(
                f"record {row} ({rec.instance_id}): metric {rec.metric!r} outside "
                f"declared range [{schema.lo}, {schema.hi}]"
            )
        if rec.outcomes is not None:
            if out_len is None:
                out_len = len(rec.outcomes)
            elif len(rec.outcomes) != out_len:
                raise DataError(
                    f"record {row} ({rec.instance_id}): outcomes length "
                    f"{len(rec.outcomes)} != {out_len} (ragged outcomes)"
                )
            if schema.metric_kind == "accuracy":
                derived = sum(rec.outcomes) / len(rec.outcomes)
                if abs(derived - rec.metric) > 1e-12:
                    raise DataError(
                        f"record {row} ({rec.instance_id}): metric {rec.metric!r} "
                        f"inconsistent with outcomes mean {derived!r}"
                    )


def derive_metric(records) -> list[InstanceRecord]:
    """Fill each record's metric with the mean of its binary outcomes vector."""
    out = []
    for row, rec in enumerate(records, start=1):
        if rec.outcomes is None:
            raise DataError(f"record {row} ({rec.instance_id}): no outcomes to derive metric from")
        if len(rec.outcomes) == 0:
            raise DataError(f"record {row} ({rec.instance_id}): empty outcomes vector")
        metric = sum(rec.outcomes) / len(rec.outcomes)
        out.append(replace(rec, metric=metric))
    return out


def _meta_from_stem(stem: str) -> tuple[str, str, str | None]:
    # "trd_50" -> ("trd_50", "trd", "50"); "identity" -> ("identity", "identity", None)
    if stem.lower().startswith("identity"):
        return stem, "identity", None
    if "_" in stem:
        op, _, mag = stem.partition("_")
        return stem, op, mag or None
    return stem, stem, None


def load_pool(
    path,
    schema: PoolSchema | None = None,
    label: str | None = None,
    mutation_operator: str | None = None,
    magnitude: str | None = None,
) -> InstancePool:
    """Parse and validate a pool CSV. Metadata not given explicitly is
    derived from the file stem (``<operator>_<magnitude>.csv``)."""
    path = Path(path)
    schema = schema or PoolSchema()
    stem_label, stem_op, stem_mag = _meta_from_stem(path.stem)

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read pool file {path}: {exc}") from exc

    reader = csv.reader(text.splitlines())
    rows = list(reader)
    if not rows:
        raise DataError(f"{path}: empty pool")
    header = [h.strip() for h in rows[0]]
    if header[:3] != ["instance_id", "seed", "metric"]:
        raise DataError(f"{path}: header must start with instance_id,seed,metric (got {header[:3]})")
    n_out = len(header) - 3
    for i, name in enumerate(header[3:]):
        m = _OUTCOME_COL.match(name)
        if not m or int(m.group(1)) != i:
            raise DataError(f"{path}: outcomes columns must be o_0..o_{n_out - 1} in order (got {name!r})")

    records: list[InstanceRecord] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}")
        instance_id = row[0].strip()
        seed_s = row[1].strip()
        metric_s = row[2].strip()
        try:
            seed = int(seed_s) if seed_s else None
        except ValueError as exc:
            raise DataError(f"{path}: row {lineno}: bad seed {seed_s!r}") from exc
        outcomes = None
        if n_out:
            try:
                outcomes = tuple(int(v) for v in row[3:])
            except ValueError as exc:
                raise DataError(f"{path}: row {lineno}: non-integer outcome value") from exc
            if any(v not in (0, 1) for v in outcomes):
                raise DataError(f"{path}: row {lineno}: outcomes must be 0/1")
        if metric_s:
            try:
                metric = float(metric_s)
            except ValueError as exc:
                raise DataError(f"{path}: row {lineno}: bad metric {metric_s!r}") from exc
        elif outcomes:
            metric = sum(outcomes) / len(outcomes)
        else:
            raise DataError(f"{path}: row {lineno}: blank metric and no outcomes columns")
        records.append(InstanceRecord(instance_id, seed, metric, outcomes))

    if not records:
        raise DataError(f"{path}: empty pool")

    try:
        return InstancePool(
            label=label or stem_label,
            mutation_operator=mutation_operator or stem_op,
            magnitude=magnitude if magnitude is not None else stem_mag,
            records=tuple(records),
            schema=schema,
        )
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_pool(pool: InstancePool, path) -> None:
    """Write a pool back to CSV; metrics use shortest round-trip formatting,
    so load(write(p)) reproduces p bit-for-bit."""
    path = Path(path)
    n_out = 0
    if pool.records[0].outcomes is not None:
        n_out = len(pool.records[0].outcomes)
    header = ["instance_id", "seed", "metric"] + [f"o_{i}" for i in range(n_out)]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in pool.records:
            row = [rec.instance_id, "" if rec.seed is None else str(rec.seed), repr(rec.metric)]
            if n_out:
                row += [str(v) for v in rec.outcomes]
            writer.writerow(row)


# --- run configuration -----------------------------------------------------

_CONFIG_FIELDS = {
    "N": int,
    "B": int,
    "n1": int,
    "n2": int,
    "prior_a": float,
    "prior_b": float,
    "ci_level": float,
    "theta": float,
    "master_seed": int,
}


@dataclass(frozen=True)
class RunConfig:
    """Engine parameters. N trials per Binomial experiment, B bootstrap
    repetitions, n1/n2 instances sampled per side per trial."""

    N: int = 100
    B: int = 100
    n1: int = 20
    n2: int = 20
    prior_a: float = 1.0
    prior_b: float = 1.0
    ci_level: float = 0.95
    theta: float = 1.15
    master_seed: int | None = None

    def __post_init__(self):
        for name in ("N", "B", "n1", "n2"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1 (got {getattr(self, name)})")
        if self.prior_a <= 0 or self.prior_b <= 0:
            raise ConfigError("prior parameters must be strictly positive")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError(f"ci_level must be in (0, 1) (got {self.ci_level})")
        if self.theta <= 0:
            raise ConfigError(f"theta must be > 0 (got {self.theta})")

    def check_pools(self, healthy: InstancePool, mutant: InstancePool) -> None:
        if self.n1 > len(healthy):
            raise ConfigError(f"n1={self.n1} exceeds healthy pool size {len(healthy)}")
        if self.n2 > len(mutant):
            raise ConfigError(f"n2={self.n2} exceeds mutant pool size {len(mutant)}")

    def snapshot(self) -> dict:
        return {
            "N": self.N,
            "B": self.B,
            "n1": self.n1,
            "n2": self.n2,
            "prior_a": self.prior_a,
            "prior_b": self.prior_b,
            "ci_level": self.ci_level,
            "theta": self.theta,
            "master_seed": self.master_seed,
        }


def load_config(path) -> RunConfig:
    """Read a config file: JSON, or flat ``key = value`` lines. Every field
    is optional; unknown keys are rejected."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip().strip('"')
    return config_from_mapping(raw, source=str(path))


def config_from_mapping(raw: dict, source: str = "config") -> RunConfig:
    kwargs = {}
    for key, value in raw.items():
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{source}: unknown config key {key!r}")
        try:
            kwargs[key] = _CONFIG_FIELDS[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: bad value for {key}: {value!r}") from exc
    return RunConfig(**kwargs)
