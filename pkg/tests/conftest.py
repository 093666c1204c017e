import pytest

from crum import make_family
from crum import dqm as dqm_mod
from crum import oqm as oqm_mod

AW_PARAMS = {"a1": 0.3, "a2": -0.2, "a3": 0.1 + 0.2j, "a4": 0.1 - 0.2j, "q": 0.6}


@pytest.fixture(scope="session")
def hermite():
    return make_family("hermite")


@pytest.fixture(scope="session")
def laguerre():
    return make_family("laguerre", g=3.0)


@pytest.fixture(scope="session")
def jacobi():
    return make_family("jacobi", g=2.0)


@pytest.fixture(scope="session")
def q_hermite():
    return make_family("q_hermite", q=0.5)


@pytest.fixture(scope="session")
def askey_wilson():
    return make_family("askey_wilson", **AW_PARAMS)


@pytest.fixture(scope="session")
def hermite_chain(hermite):
    return oqm_mod.build_chain(hermite, 3, nmax=6)


@pytest.fixture(scope="session")
def laguerre_chain(laguerre):
    return oqm_mod.build_chain(laguerre, 3, nmax=6)


@pytest.fixture(scope="session")
def jacobi_chain(jacobi):
    return oqm_mod.build_chain(jacobi, 3, nmax=6)


@pytest.fixture(scope="session")
def q_hermite_chain(q_hermite):
    return dqm_mod.build_chain(q_hermite, 2)


@pytest.fixture(scope="session")
def askey_wilson_chain(askey_wilson):
    return dqm_mod.build_chain(askey_wilson, 2)
