import numpy as np
import pytest

from footmetry import _kernels
from footmetry import stats


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jit twins up front so timed tests see steady-state speed
    _kernels.warmup()


@pytest.fixture(scope="session")
def reference_rows():
    return stats.load_reference_table()


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
