import pytest
from hypothesis import HealthCheck, settings

from causal_strain import minkowski, narrow, strain
from causal_strain.acceptance import Context
from causal_strain.scenario import Scenario

settings.register_profile("pkg", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pkg")


@pytest.fixture(scope="session")
def g():
    return strain()


@pytest.fixture(scope="session")
def cc():
    return minkowski()


@pytest.fixture(scope="session")
def ca():
    return narrow()


@pytest.fixture(scope="session")
def scenario():
    return Scenario.from_dict()


@pytest.fixture(scope="session")
def ctx(scenario):
    """Shared acceptance context; the atlases are built once per session."""
    return Context(scenario)
