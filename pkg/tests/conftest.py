import pytest

from gwimm import make_law, make_model


@pytest.fixture(scope="session")
def bern_half():
    return make_law({"family": "bernoulli01", "params": {"q1": 0.5}})


@pytest.fixture(scope="session")
def geo_bern(bern_half):
    return make_model("geometric-critical", bern_half)


@pytest.fixture(scope="session")
def bin_bern(bern_half):
    return make_model("binary", bern_half)
