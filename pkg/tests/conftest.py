import os

import pytest

os.environ.setdefault("SLABLENS_CACHE_DIR", "/tmp/slablens-test-cache")

from slablens.dispersion import gamma_star
from slablens.params import Params


@pytest.fixture(scope="session")
def gstar() -> float:
    return gamma_star().gamma_star


@pytest.fixture(scope="session")
def params_resonant(gstar) -> Params:
    """gamma = 0.5 gamma_star, modest loss."""
    return Params.from_gamma(0.5 * gstar, 1e-6)


@pytest.fixture(scope="session")
def params_shielded(gstar) -> Params:
    """gamma = 2 gamma_star."""
    return Params.from_gamma(2.0 * gstar, 1e-6)
