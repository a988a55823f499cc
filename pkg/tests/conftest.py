import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption("--run-longrun", action="store_true", default=False,
                     help="run optional multi-hour checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-longrun"):
        return
    skip = pytest.mark.skip(reason="needs --run-longrun")
    for item in items:
        if "longrun" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_density(rng, dims, rank=None):
    """Random full- or fixed-rank density matrix (Hilbert-Schmidt-ish ensemble)."""
    import math
    from netent.qcore import DensityMatrix, LocalDims
    D = math.prod(dims)
    r = rank or D
    g = rng.standard_normal((D, r)) + 1j * rng.standard_normal((D, r))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(m, LocalDims(tuple(dims)))


def random_pure(rng, dims):
    import math
    from netent.qcore import PureState, LocalDims
    D = math.prod(dims)
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return PureState(v / np.linalg.norm(v), LocalDims(tuple(dims)))
