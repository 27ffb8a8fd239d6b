"""Backend equivalence and consistency of the trial-verdict kernels."""

import numpy as np
import pytest

from probmut import MutationTest, run_test
from probmut.kernels import available_backends, backend_name, statistical_kills
from probmut.mtest import critical_t
from probmut.posterior import _sample_index_rows


def _workload(seed, n_trials=500, pool=120, take=20, shift=0.002):
    rng = np.random.default_rng(seed)
    xh = rng.normal(0.99, 0.005, pool)
    xm = rng.normal(0.99 - shift, 0.005, pool)
    gen = np.random.default_rng(seed + 1)
    idx_h = _sample_index_rows(gen, n_trials, pool, take)
    idx_m = _sample_index_rows(gen, n_trials, pool, take)
    return xh, xm, idx_h, idx_m


def test_backends_agree_exactly():
    backends = available_backends()
    if len(backends) < 2:
        pytest.skip("compiled kernel not built")
    t2 = critical_t(0.05, 38) ** 2
    for seed in range(20):
        xh, xm, idx_h, idx_m = _workload(seed)
        results = {
            name: mod.statistical_kills(xh, xm, np.ascontiguousarray(idx_h, np.intp),
                                        np.ascontiguousarray(idx_m, np.intp), t2, 0.25)
            for name, mod in backends.items()
        }
        a, b = results.values()
        assert np.array_equal(a, b)


def test_kernel_matches_scalar_run_test():
    """Each kernel verdict must equal the scalar mutation test on the same draw."""
    z = MutationTest()
    xh, xm, idx_h, idx_m = _workload(99, n_trials=300, shift=0.0004)
    t2 = critical_t(z.p_threshold, 38) ** 2
    kills = statistical_kills(xh, xm, idx_h, idx_m, t2, z.effect_threshold**2)
    for i in range(len(kills)):
        verdict = run_test(z, xh[idx_h[i]], xm[idx_m[i]])
        assert bool(kills[i]) == verdict.killed, f"trial {i}"


def test_degenerate_paths():
    xh = np.full(8, 0.5)
    xm = np.full(8, 0.7)
    gen = np.random.default_rng(3)
    idx = _sample_index_rows(gen, 40, 8, 3)
    idx2 = _sample_index_rows(gen, 40, 8, 3)
    assert statistical_kills(xh, xm, idx, idx2, 4.0, 0.25).all()  # sp=0, unequal means
    assert not statistical_kills(xh, xh, idx, idx2, 4.0, 0.25).any()  # sp=0, equal means


def test_sample_index_rows_are_uniform_subsets():
    gen = np.random.default_rng(7)
    idx = _sample_index_rows(gen, 1000, 30, 10)
    assert idx.shape == (1000, 10)
    for row in idx[:50]:
        assert len(set(row.tolist())) == 10  # without replacement
        assert row.min() >= 0 and row.max() < 30
    # every element appears roughly uniformly
    counts = np.bincount(idx.ravel(), minlength=30)
    assert counts.min() > 0.8 * counts.mean()


def test_backend_name_reports_active():
    assert backend_name() in {"native", "numpy"}
