"""Shared test configuration.

BLAS is pinned to a single thread for the whole session so that every
numerical result is bit-reproducible regardless of the machine's core count;
parallelism in the heavy studies comes from replica worker processes.
"""

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

_limits = threadpool_limits(limits=1)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
