import pytest
from hypothesis import HealthCheck, settings

from affiso import make_grid

settings.register_profile(
    "affiso",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("affiso")


@pytest.fixture(scope="session")
def grid():
    return make_grid(2048)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(256)
