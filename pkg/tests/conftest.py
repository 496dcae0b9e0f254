import pytest
from hypothesis import HealthCheck, settings

from siteforge.catalog import load_example

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def d2():
    return load_example("site_d2")


@pytest.fixture(scope="session")
def d2_site(d2):
    return d2.site()


@pytest.fixture(scope="session")
def sierpinski():
    return load_example("sierpinski")


@pytest.fixture(scope="session")
def monoid_e():
    return load_example("monoid_e")


@pytest.fixture(scope="session")
def one_object():
    return load_example("one_object")


@pytest.fixture(scope="session")
def cospan_v():
    return load_example("cospan_v")


@pytest.fixture(scope="session")
def nobot():
    return load_example("site_d2_nobot")
