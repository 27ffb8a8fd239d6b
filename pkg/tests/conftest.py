import numpy as np
import pytest

from probmut import InstancePool, InstanceRecord, PoolSchema, PopulationSpec, gen_population
from probmut.rng import Stream

HEALTHY_MU = 0.9915
HEALTHY_SIGMA = 0.0006


def make_pool(metrics, label="pool", operator="identity", magnitude=None, schema=None):
    records = tuple(
        InstanceRecord(f"{label}-{i:04d}", i, float(m)) for i, m in enumerate(metrics)
    )
    return InstancePool(
        label=label,
        mutation_operator=operator,
        magnitude=magnitude,
        records=records,
        schema=schema or PoolSchema(),
    )


def synthetic_pool(shift_sd, label, seed_index, size=100, master_seed=2024):
    """Accuracy-shaped truncated-normal pool; shift is in units of the
    population sd below the healthy mean."""
    spec = PopulationSpec(
        size=size,
        mu=HEALTHY_MU - shift_sd * HEALTHY_SIGMA,
        sigma=HEALTHY_SIGMA,
        label=label,
        mutation_operator="identity" if shift_sd == 0 else "trd",
        magnitude=None if shift_sd == 0 else str(shift_sd),
    )
    return gen_population(spec, Stream(master_seed).split(seed_index))


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
