"""Source-level training-data mutations.

Both operators transform the training split once, deterministically for a
given seed; trained instances then differ only by their training seed.
"""

from __future__ import annotations

import numpy as np

IDENTITY = "identity"
TRD = "trd"
TCL = "tcl"


def _check_pct(pct: float) -> None:
    if not 0.0 < pct < 100.0:
        raise ValueError(f"mutation percentage must be in (0, 100) (got {pct})")


def delete_training_data(X: np.ndarray, y: np.ndarray, pct: float, seed: int):
    """Remove ceil(pct%) of the samples of each class (proportional deletion)."""
    _check_pct(pct)
    rng = np.random.default_rng(seed)
    keep = np.ones(len(y), dtype=bool)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        n_remove = int(np.ceil(pct / 100.0 * len(idx)))
        keep[rng.choice(idx, size=n_remove, replace=False)] = False
    return X[keep], y[keep]


def change_labels(X: np.ndarray, y: np.ndarray, pct: float, seed: int):
    """Relabel a uniform pct% sample of the training data to the modal class."""
    _check_pct(pct)
    rng = np.random.default_rng(seed)
    modal = int(np.bincount(y).argmax())
    n_change = int(round(pct / 100.0 * len(y)))
    mutated = y.copy()
    mutated[rng.choice(len(y), size=n_change, replace=False)] = modal
    return X, mutated


def parse_mutation(text: str) -> tuple[str, float | None]:
    """'identity' | 'trd:50' | 'tcl:3' -> (operator, percentage)."""
    if text == IDENTITY:
        return IDENTITY, None
    op, sep, pct_s = text.partition(":")
    if op not in (TRD, TCL) or not sep:
        raise ValueError(f"mutation must be identity, trd:<pct> or tcl:<pct> (got {text!r})")
    pct = float(pct_s)
    _check_pct(pct)
    return op, pct


def apply_mutation(X: np.ndarray, y: np.ndarray, operator: str, pct: float | None, seed: int):
    if operator == IDENTITY:
        return X, y
    if operator == TRD:
        return delete_training_data(X, y, pct, seed)
    if operator == TCL:
        return change_labels(X, y, pct, seed)
    raise ValueError(f"unknown mutation operator {operator!r}")


def pool_filename(operator: str, pct: float | None) -> str:
    if operator == IDENTITY:
        return "identity.csv"
    pct_s = f"{pct:g}".replace(".", "p")
    return f"{operator}_{pct_s}.csv"
