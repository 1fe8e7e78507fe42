import hypothesis
import numpy as np
import pytest

from pmblue import make_family

hypothesis.settings.register_profile(
    "ci", max_examples=25, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def uniform_spec():
    return make_family("uniform")


@pytest.fixture(scope="session")
def exp_spec():
    # weibull with c=1 is the standard exponential
    return make_family("weibull", c=1.0)


@pytest.fixture(scope="session")
def sweep_specs():
    return [make_family("power", **{"lambda": 1.0}),
            make_family("power", **{"lambda": 2.0}),
            make_family("logistic"),
            make_family("pareto", a=3.0),
            make_family("negexp"),
            make_family("weibull", c=1.0),
            make_family("weibull", c=2.0),
            make_family("gumbel"),
            make_family("normal")]


@pytest.fixture(autouse=True)
def _seed_numpy():
    np.random.seed(0)
