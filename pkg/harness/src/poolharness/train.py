"""Train a population of small MLP instances and emit an instance-pool CSV."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from poolharness.mutations import apply_mutation, pool_filename


class DatasetUnavailable(RuntimeError):
    """Dataset could not be loaded; the run can be retried."""


@dataclass
class HarnessConfig:
    n_instances: int = 30
    dataset: str = "digits"
    epochs: int = 40
    batch_size: int | str = "auto"
    hidden: tuple[int, ...] = (32,)
    base_seed: int = 1000
    test_fraction: float = 0.2
    outcomes: bool = False
    out_dir: Path = field(default_factory=lambda: Path("pools"))

    def __post_init__(self):
        if self.n_instances < 1:
            raise ValueError(f"n_instances must be >= 1 (got {self.n_instances})")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1) (got {self.test_fraction})")
        self.out_dir = Path(self.out_dir)


def load_dataset(cfg: HarnessConfig):
    """Fixed train/test split; the test set is shared by every pool so all
    instances are evaluated on the same inputs."""
    if cfg.dataset != "digits":
        raise DatasetUnavailable(f"unknown dataset {cfg.dataset!r} (only 'digits' is bundled)")
    try:
        from sklearn.datasets import load_digits
        from sklearn.model_selection import train_test_split
    except ImportError as exc:  # scikit-learn missing or broken
        raise DatasetUnavailable(f"cannot import scikit-learn: {exc}") from exc
    X, y = load_digits(return_X_y=True)
    return train_test_split(
        X, y, test_size=cfg.test_fraction, random_state=cfg.base_seed, stratify=y
    )


def _train_instance(cfg: HarnessConfig, X, y, seed: int):
    from sklearn.neural_network import MLPClassifier

    clf = MLPClassifier(
        hidden_layer_sizes=cfg.hidden,
        max_iter=cfg.epochs,
        batch_size=cfg.batch_size,
        random_state=seed,
    )
    with warnings.catch_warnings():
        # instances are intentionally trained for few epochs
        warnings.simplefilter("ignore")
        clf.fit(X, y)
    return clf


def train_pool(cfg: HarnessConfig, mutation: str | tuple[str, float | None]) -> Path:
    """Train `n_instances` under one mutation and write the pool CSV.

    The mutation transforms the training split once (seeded from base_seed);
    instance i trains with seed base_seed + i, recorded in the seed column.
    Instances below chance-plus-margin accuracy are flagged but kept.
    """
    if isinstance(mutation, str):
        from poolharness.mutations import parse_mutation

        operator, pct = parse_mutation(mutation)
    else:
        operator, pct = mutation

    Xtr, Xte, ytr, yte = load_dataset(cfg)
    Xm, ym = apply_mutation(Xtr, ytr, operator, pct, seed=cfg.base_seed)
    n_classes = len(np.unique(ytr))
    chance_margin = 1.0 / n_classes + 0.05

    rows = []
    for i in range(cfg.n_instances):
        seed = cfg.base_seed + i
        clf = _train_instance(cfg, Xm, ym, seed)
        correct = (clf.predict(Xte) == yte).astype(int)
        accuracy = float(correct.mean())
        if accuracy < chance_margin:
            print(
                f"warning: instance {i} of {operator}"
                f"{'' if pct is None else f'({pct})'} near chance: accuracy {accuracy:.3f}"
            )
        rows.append((f"{operator}-{i:04d}", seed, accuracy, correct))

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / pool_filename(operator, pct)
    header = ["instance_id", "seed", "metric"]
    if cfg.outcomes:
        header += [f"o_{j}" for j in range(len(yte))]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for instance_id, seed, accuracy, correct in rows:
            row = [instance_id, str(seed), repr(accuracy)]
            if cfg.outcomes:
                row += [str(v) for v in correct]
            writer.writerow(row)
    return path
