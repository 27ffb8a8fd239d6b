"""Command-line surface: validate, simulate, test, posterior, decide, score,
flakiness, tradeoff, export-plot.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical
tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from probmut import __version__
from probmut.decision import IdealPosteriors, mutation_score, similarity_ratio
from probmut.errors import ConfigError, DataError, ToleranceError
from probmut.kernels import backend_name, statistical_kills
from probmut.mce import tradeoff_study
from probmut.mtest import POINTWISE_DELTA, STATISTICAL, MutationTest, critical_t, run_test
from probmut.pools import InstancePool, PoolSchema, RunConfig, load_config, load_pool, write_pool
from probmut.posterior import (
    bayes_bag,
    credible_interval,
    density_grid,
    map_estimate,
    mmse,
    _sample_index_rows,
)
from probmut.reports import (
    canonical_json,
    pool_fingerprint,
    write_density_csv,
    write_report,
    write_rows_csv,
)
from probmut.rng import Stream
from probmut.synth import PER_INPUT_BERNOULLI, TRUNCATED_NORMAL, PopulationSpec, gen_population


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON or key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed (64-bit)")
    parser.add_argument("--out", default="probmut-out", help="output directory")
    parser.add_argument("--strict", action="store_true", help="fail instead of randomizing a missing seed")


def _add_schema(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--metric-kind",
        default="accuracy",
        choices=["accuracy", "error", "angle", "custom"],
        help="declared metric semantics of the pool files",
    )
    parser.add_argument("--metric-min", type=float, default=None)
    parser.add_argument("--metric-max", type=float, default=None)


def _add_test_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--test-kind", default=STATISTICAL, choices=[STATISTICAL, POINTWISE_DELTA])
    parser.add_argument("--p-threshold", type=float, default=0.05)
    parser.add_argument("--effect-threshold", type=float, default=0.5)
    parser.add_argument("--delta-tolerance", type=float, default=1e-12)


def _schema_from(args) -> PoolSchema:
    return PoolSchema(metric_kind=args.metric_kind, lo=args.metric_min, hi=args.metric_max)


def _mutation_test_from(args) -> MutationTest:
    return MutationTest(
        kind=args.test_kind,
        p_threshold=args.p_threshold,
        effect_threshold=args.effect_threshold,
        delta_tolerance=args.delta_tolerance,
    )


def _resolve_config(args, **overrides) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    fields = cfg.snapshot()
    if args.seed is not None:
        fields["master_seed"] = args.seed
    for key, value in overrides.items():
        if value is not None:
            fields[key] = value
    if fields["master_seed"] is None:
        if args.strict:
            raise ConfigError("no master seed: pass --seed or set master_seed in the config (--strict)")
        fields["master_seed"] = secrets.randbits(63)
        print(f"master_seed = {fields['master_seed']} (randomized; pass --seed to reproduce)")
    return RunConfig(**fields)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _posterior_summary(bagged, ci, extras=None) -> dict:
    summary = {
        "components": [[c.alpha, c.beta_param] for c in bagged.components],
        "estimates": {
            "mmse": mmse(bagged),
            "map": map_estimate(bagged),
            "variance": bagged.variance(),
        },
        "credible_interval": {
            "lo": ci.lo,
            "hi": ci.hi,
            "level": ci.level,
            "kind": ci.kind,
            "multimodal": ci.multimodal,
        },
        "provenance": bagged.provenance,
    }
    if extras:
        summary.update(extras)
    return summary


def _export_posterior(out: Path, name: str, bagged, ci, grid_points: int = 1001) -> dict:
    xs, dens = density_grid(bagged, grid_points)
    density_csv = out / f"{name}_density.csv"
    summary_json = out / f"{name}_posterior.json"
    write_density_csv(density_csv, xs, dens)
    summary_json.write_text(canonical_json(_posterior_summary(bagged, ci)), encoding="utf-8")
    return {"density_csv": density_csv.name, "summary_json": summary_json.name}


class _StageError:
    """Re-raise pipeline errors tagged with the failing stage."""

    def __init__(self, stage: str):
        self.stage = stage

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (ConfigError, DataError, ToleranceError)):
            raise exc_type(f"[{self.stage}] {exc}") from exc
        return False


# --- subcommands -------------------------------------------------------------


def cmd_validate(args) -> int:
    schema = _schema_from(args)
    for path in args.pools:
        pool = load_pool(path, schema=schema)
        metrics = pool.metrics
        print(
            f"{path}: OK ({len(pool)} records, operator={pool.mutation_operator}, "
            f"metric mean={metrics.mean():.6f} sd={metrics.std(ddof=1) if len(pool) > 1 else 0.0:.6f})"
        )
    return 0


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    schema = _schema_from(args)
    spec = PopulationSpec(
        size=args.size,
        law=args.law,
        mu=args.mu,
        sigma=args.sigma,
        lo=args.metric_min,
        hi=args.metric_max,
        p=args.p,
        t_len=args.t_len,
        label=args.label,
        mutation_operator=args.operator,
        magnitude=args.magnitude,
    )
    pool = gen_population(spec, Stream(cfg.master_seed), schema=schema)
    out_file = Path(args.out_file) if args.out_file else _out_dir(args) / f"{args.label}.csv"
    out_file.parent.mkdir(parents=True, exist_ok=True)
    write_pool(pool, out_file)
    meta = {
        "command": "simulate",
        "config": cfg.snapshot(),
        "master_seed": cfg.master_seed,
        "population": {
            "law": spec.law, "mu": spec.mu, "sigma": spec.sigma, "p": spec.p,
            "t_len": spec.t_len, "size": spec.size, "label": spec.label,
            "mutation_operator": spec.mutation_operator, "magnitude": spec.magnitude,
        },
    }
    out_file.with_suffix(".meta.json").write_text(canonical_json(meta), encoding="utf-8")
    print(f"wrote {len(pool)} records to {out_file} (mean metric {pool.metrics.mean():.6f})")
    return 0


def cmd_test(args) -> int:
    cfg = _resolve_config(args, n1=args.n1, n2=args.n2)
    schema = _schema_from(args)
    z = _mutation_test_from(args)
    healthy = load_pool(args.healthy, schema=schema, mutation_operator="identity")
    mutant = load_pool(args.mutant, schema=schema)
    if args.full:
        h_sample, m_sample = healthy.records, mutant.records
    else:
        cfg.check_pools(healthy, mutant)
        gen = Stream(cfg.master_seed).generator()
        idx_h = gen.choice(len(healthy), size=cfg.n1, replace=False)
        idx_m = gen.choice(len(mutant), size=cfg.n2, replace=False)
        h_sample = [healthy.records[i] for i in idx_h]
        m_sample = [mutant.records[i] for i in idx_m]
    verdict = run_test(z, h_sample, m_sample)
    print(
        json.dumps(
            {
                "killed": verdict.killed,
                "p_value": verdict.p_value,
                "effect_size": verdict.effect_size,
                "degenerate": verdict.degenerate,
                "n1": len(h_sample),
                "n2": len(m_sample),
            },
            indent=2,
        )
    )
    return 0


def _decide_pair(healthy: InstancePool, mutant: InstancePool, z, cfg, stream):
    bagged = bayes_bag(healthy, mutant, z, cfg, stream)
    ci = credible_interval(bagged, cfg.ci_level, "equal-tailed")
    ideals = IdealPosteriors.from_config(cfg)
    effect = similarity_ratio(bagged, ideals)
    return bagged, ci, effect


def cmd_decide(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args, theta=args.theta, n1=args.n1, n2=args.n2)
    schema = _schema_from(args)
    z = _mutation_test_from(args)
    out = _out_dir(args)

    healthy = load_pool(args.healthy, schema=schema, mutation_operator="identity", label="healthy")
    healthy_fp = pool_fingerprint(args.healthy, healthy)
    mutant_paths = list(args.mutants)
    if args.include_identity:
        mutant_paths.insert(0, args.healthy)

    stream = Stream(cfg.master_seed)
    entries = []
    effects = []
    pending_exports = []  # outputs are written only after every stage succeeds
    for j, path in enumerate(mutant_paths):
        with _StageError(f"load {Path(path).name}"):
            mutant = load_pool(path, schema=schema)
            fp = pool_fingerprint(path, mutant)
        if fp["sha256"] == healthy_fp["sha256"]:
            # identity check: disjoint halves of the healthy pool by sorted id
            h_side, m_side = healthy.split_sorted_halves()
            label = "identity"
            protocol = "split-halves"
        else:
            h_side, m_side, label, protocol = healthy, mutant, mutant.label, "direct"
        with _StageError(f"pipeline {label}"):
            bagged, ci, effect = _decide_pair(h_side, m_side, z, cfg, stream.split(j))
        exports = {"density_csv": f"{label}_density.csv", "summary_json": f"{label}_posterior.json"}
        pending_exports.append((label, bagged, ci))
        effects.append(effect)
        entries.append(
            {
                "label": label,
                "protocol": protocol,
                "pool": fp,
                "posterior": {
                    "mmse": mmse(bagged),
                    "map": map_estimate(bagged),
                    "variance": bagged.variance(),
                    "credible_interval": {
                        "lo": ci.lo,
                        "hi": ci.hi,
                        "level": ci.level,
                        "kind": ci.kind,
                    },
                },
                "effect": {
                    "raw_ratio": effect.ratio,
                    "display_ratio": effect.display_ratio,
                    "effect_class": effect.effect_class,
                    "verdict": effect.verdict,
                    "h_to_not_killed": effect.h_to_not_killed,
                    "h_to_killed": effect.h_to_killed,
                    "diagnostics": effect.diagnostics,
                },
                "exports": exports,
            }
        )

    score = mutation_score(effects, cfg.theta)
    for label, bagged, ci in pending_exports:
        _export_posterior(out, label, bagged, ci)
    payload = {
        "command": "decide",
        "version": __version__,
        "kernel": backend_name(),
        "config": cfg.snapshot(),
        "master_seed": cfg.master_seed,
        "healthy": healthy_fp,
        "mutants": entries,
        "mutation_score": score,
        "theta": cfg.theta,
    }
    report_path = write_report(out, payload, started)

    width = max(len(e["label"]) for e in entries)
    print(f"{'mutation':<{width}}  ratio  class                    verdict")
    for e in entries:
        print(
            f"{e['label']:<{width}}  {e['effect']['display_ratio']:>5}  "
            f"{e['effect']['effect_class']:<23}  {e['effect']['verdict']}"
        )
    print(f"mutation score (theta={cfg.theta}): {score}")
    print(f"report: {report_path}")
    return 0


def cmd_score(args) -> int:
    report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    try:
        ratios = [m["effect"]["raw_ratio"] for m in report["mutants"]]
    except (KeyError, TypeError) as exc:
        raise DataError(f"{args.report}: not a decide report: missing {exc}") from exc
    theta = args.theta if args.theta is not None else report.get("theta", 1.15)
    if not ratios:
        raise DataError("report contains no mutations")
    score = sum(1 for r in ratios if float(r) > theta) / len(ratios)
    print(f"mutation score (theta={theta}): {score}")
    return 0


def cmd_posterior(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args, n1=args.n1, n2=args.n2)
    schema = _schema_from(args)
    z = _mutation_test_from(args)
    out = _out_dir(args)
    healthy = load_pool(args.healthy, schema=schema, mutation_operator="identity", label="healthy")
    mutant = load_pool(args.mutant, schema=schema)
    bagged = bayes_bag(healthy, mutant, z, cfg, Stream(cfg.master_seed))
    ci = credible_interval(bagged, cfg.ci_level, args.ci_kind)
    exports = _export_posterior(out, mutant.label, bagged, ci, args.grid)
    payload = {
        "command": "posterior",
        "version": __version__,
        "kernel": backend_name(),
        "config": cfg.snapshot(),
        "master_seed": cfg.master_seed,
        "healthy": pool_fingerprint(args.healthy, healthy),
        "mutant": pool_fingerprint(args.mutant, mutant),
        "posterior": _posterior_summary(bagged, ci),
        "exports": exports,
    }
    write_report(out, payload, started)
    print(
        f"{mutant.label}: mmse={mmse(bagged):.4f} map={map_estimate(bagged):.4f} "
        f"ci[{ci.kind},{ci.level}]=[{ci.lo:.4f}, {ci.hi:.4f}]"
    )
    return 0


def cmd_export_plot(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    schema = _schema_from(args)
    z = _mutation_test_from(args)
    out = _out_dir(args)
    healthy = load_pool(args.healthy, schema=schema, mutation_operator="identity", label="healthy")
    stream = Stream(cfg.master_seed)
    ideals = IdealPosteriors.from_config(cfg)
    xs = np.linspace(0.0, 1.0, args.grid)
    write_rows_csv(
        out / "ideal_densities.csv",
        [
            {
                "x": float(x),
                "q_not_killed": float(ideals.q_not_killed.pdf(np.array([x]))[0]),
                "q_killed": float(ideals.q_killed.pdf(np.array([x]))[0]),
            }
            for x in xs
        ],
    )
    exported = []
    for j, path in enumerate(args.mutants):
        mutant = load_pool(path, schema=schema)
        bagged = bayes_bag(healthy, mutant, z, cfg, stream.split(j))
        ci = credible_interval(bagged, cfg.ci_level, "equal-tailed")
        exported.append(_export_posterior(out, mutant.label, bagged, ci, args.grid))
        print(f"exported {mutant.label} density ({args.grid} points) to {out}")
    payload = {
        "command": "export-plot",
        "version": __version__,
        "kernel": backend_name(),
        "config": cfg.snapshot(),
        "master_seed": cfg.master_seed,
        "grid": args.grid,
        "healthy": pool_fingerprint(args.healthy, healthy),
        "exports": exported,
    }
    write_report(out, payload, started)
    return 0


def cmd_flakiness(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    schema = _schema_from(args)
    z = _mutation_test_from(args)
    out = _out_dir(args)
    k = args.k
    if k < 2 and z.kind == STATISTICAL:
        raise ConfigError("statistical test needs k >= 2 instances per side")

    healthy = load_pool(args.healthy, schema=schema, mutation_operator="identity", label="healthy")
    half = len(healthy) // 2
    if k > half:
        raise ConfigError(
            f"k={k} exceeds half the healthy pool ({half}); the protocol needs two disjoint halves"
        )
    mutants = [load_pool(p, schema=schema) for p in args.mutants]
    for m in mutants:
        if k > len(m):
            raise ConfigError(f"k={k} exceeds mutant pool {m.label} size {len(m)}")

    columns = ["identity"] + [m.label for m in mutants]
    t2 = critical_t(z.p_threshold, 2 * k - 2) ** 2
    d2 = z.effect_threshold**2
    stream = Stream(cfg.master_seed)
    rows = []
    rates = {c: [] for c in columns}
    for r in range(args.partitions):
        part = stream.split(r)
        perm = part.split(0).generator().permutation(len(healthy))
        half_a = healthy.metrics[perm[:half]]
        half_b = healthy.metrics[perm[half : 2 * half]]
        for ci_idx, col in enumerate(columns):
            other = half_b if col == "identity" else mutants[ci_idx - 1].metrics
            gen = part.split(1 + ci_idx).generator()
            idx_a = _sample_index_rows(gen, args.samplings, len(half_a), k)
            idx_o = _sample_index_rows(gen, args.samplings, len(other), k)
            kills = statistical_kills(half_a, other, idx_a, idx_o, t2, d2)
            rate = float(kills.mean())
            rates[col].append(rate)
            rows.append({"partition": r, "column": col, "kill_rate": rate})

    means = {c: float(np.mean(rates[c])) for c in columns}
    write_rows_csv(out / "flakiness.csv", rows)
    payload = {
        "command": "flakiness",
        "version": __version__,
        "kernel": backend_name(),
        "config": cfg.snapshot(),
        "master_seed": cfg.master_seed,
        "k": k,
        "samplings": args.samplings,
        "partitions": args.partitions,
        "healthy": pool_fingerprint(args.healthy, healthy),
        "mean_kill_probability": means,
    }
    write_report(out, payload, started)
    print("  ".join(f"{c}" for c in columns))
    print("  ".join(f"{means[c]:.2f}" for c in columns))
    return 0


def _parse_sizes(text: str) -> list[int]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"size range must be lo:hi:step (got {text!r})")
        lo, hi, step = (int(p) for p in parts)
        if step < 1 or hi < lo:
            raise ConfigError(f"bad size range {text!r}")
        return list(range(lo, hi + 1, step))
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad sizes list {text!r}") from exc


def cmd_tradeoff(args) -> int:
    started = time.monotonic()
    cfg = _resolve_config(args)
    schema = _schema_from(args)
    z = _mutation_test_from(args)
    out = _out_dir(args)
    healthy = load_pool(args.healthy, schema=schema, mutation_operator="identity", label="healthy")
    mutant = load_pool(args.mutant, schema=schema)
    sizes = _parse_sizes(args.sizes)
    report = tradeoff_study(
        healthy,
        mutant,
        z,
        cfg,
        sizes,
        n_pop=args.n_pop,
        n_reps=args.n_reps,
        stream=Stream(cfg.master_seed),
        level=cfg.ci_level,
    )
    write_rows_csv(out / "tradeoff.csv", report.rows())
    payload = {
        "command": "tradeoff",
        "version": __version__,
        "kernel": backend_name(),
        "config": cfg.snapshot(),
        "master_seed": cfg.master_seed,
        "sizes": list(report.sample_sizes),
        "n_pop": report.n_pop,
        "n_reps": args.n_reps,
        "healthy": pool_fingerprint(args.healthy, healthy),
        "mutant": pool_fingerprint(args.mutant, mutant),
        "dispersion_by_size": {str(s): v for s, v in report.dispersion_by_size().items()},
    }
    write_report(out, payload, started)
    print("size  cross-draw sd of mean estimate")
    for size, sd in report.dispersion_by_size().items():
        print(f"{size:>4}  {sd:.6f}")
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probmut",
        description="Probabilistic mutation testing over populations of trained model instances.",
    )
    parser.add_argument("--version", action="version", version=f"probmut {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate pool CSV files")
    p.add_argument("pools", nargs="+")
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="generate a synthetic pool CSV")
    p.add_argument("--law", default=TRUNCATED_NORMAL, choices=[TRUNCATED_NORMAL, PER_INPUT_BERNOULLI])
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--t-len", type=int, default=100)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--label", default="synthetic")
    p.add_argument("--operator", default="identity")
    p.add_argument("--magnitude", default=None)
    p.add_argument("--out-file", default=None)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="run one mutation test on two pools")
    p.add_argument("healthy")
    p.add_argument("mutant")
    p.add_argument("--full", action="store_true", help="compare entire pools instead of sampling")
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    _add_test_flags(p)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("posterior", help="bagged posterior for one mutant pool")
    p.add_argument("healthy")
    p.add_argument("mutant")
    p.add_argument("--ci-kind", default="equal-tailed", choices=["equal-tailed", "hdi", "mean-centered"])
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--n1", type=int, default=None, help="instances per healthy sample")
    p.add_argument("--n2", type=int, default=None, help="instances per mutant sample")
    _add_test_flags(p)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("decide", help="full pipeline: posteriors, ratios, verdicts, mutation score")
    p.add_argument("healthy")
    p.add_argument("mutants", nargs="+")
    p.add_argument("--theta", type=float, default=None, help="mutation-score threshold override")
    p.add_argument("--n1", type=int, default=None, help="instances per healthy sample")
    p.add_argument("--n2", type=int, default=None, help="instances per mutant sample")
    p.add_argument(
        "--include-identity",
        action="store_true",
        help="also run the healthy pool against itself (split-halves protocol)",
    )
    _add_test_flags(p)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("score", help="recompute the mutation score from a decide report")
    p.add_argument("report")
    p.add_argument("--theta", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("flakiness", help="kill-probability table across repeated partitions")
    p.add_argument("healthy")
    p.add_argument("mutants", nargs="*")
    p.add_argument("--k", type=int, default=20, help="instances sampled per side per test")
    p.add_argument("--samplings", type=int, default=100, help="tests per partition")
    p.add_argument("--partitions", type=int, default=50, help="partition repetitions")
    _add_test_flags(p)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_flakiness)

    p = sub.add_parser("tradeoff", help="Monte-Carlo error vs sample size study")
    p.add_argument("healthy")
    p.add_argument("mutant")
    p.add_argument("--sizes", default="25:190:15", help="comma list or lo:hi:step")
    p.add_argument("--n-pop", type=int, default=30)
    p.add_argument("--n-reps", type=int, default=100)
    _add_test_flags(p)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("export-plot", help="density grids for external plotting")
    p.add_argument("healthy")
    p.add_argument("mutants", nargs="+")
    p.add_argument("--grid", type=int, default=1001)
    _add_test_flags(p)
    _add_schema(p)
    _add_common(p)
    p.set_defaults(func=cmd_export_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ToleranceError as exc:
        print(f"numerical tolerance failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
