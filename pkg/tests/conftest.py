import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cg1():
    from superanalysis.csa_core import complex_grassmann

    return complex_grassmann(1)


@pytest.fixture(scope="session")
def cg2():
    from superanalysis.csa_core import complex_grassmann

    return complex_grassmann(2)


@pytest.fixture(scope="session")
def ex3():
    from superanalysis.csa_core import example3_table

    return example3_table()
