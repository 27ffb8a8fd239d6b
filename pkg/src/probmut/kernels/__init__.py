"""Trial-verdict kernels: compiled fast path with a vectorized numpy fallback.

The backend is selected once at import. Set ``PROBMUT_KERNEL=python`` to
force the fallback or ``PROBMUT_KERNEL=native`` to require the compiled
extension; the default uses the extension when built.

Both backends implement ``statistical_kills(xh, xm, idx_h, idx_m, t2_crit,
d2_min) -> uint8[N]``: for each trial row, the pooled two-sample t statistic
and Cohen's d are computed on the indexed metric values and the verdict is
``t^2 > t2_crit and d^2 >= d2_min`` (zero pooled variance kills only on
unequal means). Randomness stays outside the kernels: callers supply the
sampled index rows, so every backend sees identical draws.
"""

from __future__ import annotations

import os

import numpy as np

from probmut.kernels import _numpy

try:
    from probmut.kernels import _native
except ImportError:  # extension not built
    _native = None

_requested = os.environ.get("PROBMUT_KERNEL", "auto")
if _requested == "python":
    _active = _numpy
elif _requested == "native":
    if _native is None:
        raise ImportError("PROBMUT_KERNEL=native but the compiled kernel is not built")
    _active = _native
elif _requested == "auto":
    _active = _native if _native is not None else _numpy
else:
    raise ImportError(f"PROBMUT_KERNEL must be auto, python or native (got {_requested!r})")


def backend_name() -> str:
    return "native" if _active is _native else "numpy"


def available_backends() -> dict:
    out = {"numpy": _numpy}
    if _native is not None:
        out["native"] = _native
    return out


def statistical_kills(xh, xm, idx_h, idx_m, t2_crit: float, d2_min: float) -> np.ndarray:
    xh = np.ascontiguousarray(xh, dtype=np.float64)
    xm = np.ascontiguousarray(xm, dtype=np.float64)
    idx_h = np.ascontiguousarray(idx_h, dtype=np.intp)
    idx_m = np.ascontiguousarray(idx_m, dtype=np.intp)
    return _active.statistical_kills(xh, xm, idx_h, idx_m, float(t2_crit), float(d2_min))
