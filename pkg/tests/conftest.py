import pytest

from rmtt.fincat import chain_poset, delta1, terminal_category
from rmtt.kernel import load_signature
from rmtt.rfib import rep_map_classifier


@pytest.fixture(scope="session")
def d1():
    return delta1()


@pytest.fixture(scope="session")
def d1_cls(d1):
    return rep_map_classifier(d1)


@pytest.fixture(scope="session")
def chain2():
    return chain_poset(2)


@pytest.fixture(scope="session")
def point():
    return terminal_category()


@pytest.fixture(scope="session")
def tthg():
    return load_signature("tthg")


@pytest.fixture(scope="session")
def itth():
    return load_signature("itth")


@pytest.fixture(scope="session")
def etth1():
    return load_signature("etth1")


@pytest.fixture(scope="session")
def itthpi():
    return load_signature("itthpi")
