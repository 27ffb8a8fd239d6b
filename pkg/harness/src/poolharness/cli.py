"""Command-line entry point: train mutated model populations, write pool CSVs.

Exit codes: 0 ok, 2 bad arguments, 75 dataset unavailable (retriable).
"""

from __future__ import annotations

import argparse
import sys
import time

from poolharness.mutations import parse_mutation
from poolharness.train import DatasetUnavailable, HarnessConfig, train_pool

EX_TEMPFAIL = 75


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poolharness",
        description="Train small-MLP instance populations under training-data mutations.",
    )
    parser.add_argument("--n-instances", type=int, default=30)
    parser.add_argument("--dataset", default="digits")
    parser.add_argument("--epochs", type=int, default=40)
    parser.add_argument("--batch-size", default="auto")
    parser.add_argument("--hidden", default="32", help="comma-separated layer widths")
    parser.add_argument("--base-seed", type=int, default=1000)
    parser.add_argument("--test-fraction", type=float, default=0.2)
    parser.add_argument("--outcomes", action="store_true", help="write per-input correctness columns")
    parser.add_argument("--out", default="pools", help="output directory for pool CSVs")
    parser.add_argument(
        "--mutations",
        nargs="+",
        default=["identity", "trd:50", "tcl:3"],
        help="identity, trd:<pct>, tcl:<pct>",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        mutations = [parse_mutation(m) for m in args.mutations]
        hidden = tuple(int(h) for h in args.hidden.split(",") if h.strip())
        batch_size = args.batch_size if args.batch_size == "auto" else int(args.batch_size)
        cfg = HarnessConfig(
            n_instances=args.n_instances,
            dataset=args.dataset,
            epochs=args.epochs,
            batch_size=batch_size,
            hidden=hidden,
            base_seed=args.base_seed,
            test_fraction=args.test_fraction,
            outcomes=args.outcomes,
            out_dir=args.out,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        for mutation in mutations:
            t0 = time.monotonic()
            path = train_pool(cfg, mutation)
            print(f"wrote {path} ({cfg.n_instances} instances, {time.monotonic() - t0:.1f}s)")
    except DatasetUnavailable as exc:
        print(f"dataset unavailable (retry later): {exc}", file=sys.stderr)
        return EX_TEMPFAIL
    return 0


if __name__ == "__main__":
    sys.exit(main())
