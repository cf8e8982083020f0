import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("numeric", deadline=None, max_examples=30, derandomize=True)
settings.load_profile("numeric")


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="session")
def h3_coarse():
    """Default experiment (512 points) with its full result, curves included."""
    from qfluct.particle import GridSpec, H3Experiment, H3Params

    exp = H3Experiment(GridSpec(), H3Params())
    return exp, exp.run(with_curves=True)


@pytest.fixture(scope="session")
def h3_fine():
    from qfluct.particle import GridSpec, H3Experiment, H3Params

    exp = H3Experiment(GridSpec().doubled(), H3Params())
    return exp, exp.run(with_curves=False, with_leakage=False)
