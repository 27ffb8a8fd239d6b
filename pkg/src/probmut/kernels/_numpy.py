"""Vectorized numpy implementation of the trial-verdict kernel."""

from __future__ import annotations

import numpy as np


def statistical_kills(xh, xm, idx_h, idx_m, t2_crit, d2_min):
    gx = xh[idx_h]  # (N, n1)
    gy = xm[idx_m]  # (N, n2)
    n1 = gx.shape[1]
    n2 = gy.shape[1]
    df = n1 + n2 - 2
    mx = gx.mean(axis=1)
    my = gy.mean(axis=1)
    ssx = ((gx - mx[:, None]) ** 2).sum(axis=1)
    ssy = ((gy - my[:, None]) ** 2).sum(axis=1)
    sp2 = (ssx + ssy) / df
    diff = mx - my
    inv_n = 1.0 / n1 + 1.0 / n2

    kills = np.zeros(gx.shape[0], dtype=np.uint8)
    ok = sp2 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = (diff * diff) / sp2
        t2 = d2 / inv_n
    kills[ok & (t2 > t2_crit) & (d2 >= d2_min)] = 1
    kills[~ok & (diff != 0.0)] = 1  # zero pooled variance, unequal means
    return kills
