import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rkhsbuild import KernelSpec

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# built-in kernels with finite diagonals, with a sampling window for each
FINITE_KERNELS = [
    pytest.param(KernelSpec.brownian(), (0.0, 5.0), id="brownian"),
    pytest.param(KernelSpec.bessel(), (-2.0, 2.0), id="bessel"),
    pytest.param(KernelSpec.rbf(1.0), (-3.0, 3.0), id="rbf"),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
