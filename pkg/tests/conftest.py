import numpy as np
import pytest

from pencon.builtins import builtin_phi
from pencon.solvers import ProblemInstance
from pencon.structured import structured_from_coordinates


def scalar_instance(name, params=None, norm="L2"):
    return ProblemInstance(structured_from_coordinates(1, builtin_phi(name, params), [0]), [[1.0]], norm)


def quad2d_instance(norm="L2"):
    # phi(t) = (t - 3)^2 on X1 = span e1, X2 = span e2, L = [[1,0],[1,1]]: c = 3, d = 6, g(tau) = 2(3 - tau)
    phi = builtin_phi("quadratic", {"Q": [[2.0]], "b": [3.0]})
    return ProblemInstance(structured_from_coordinates(2, phi, [0], [1]), [[1.0, 0.0], [1.0, 1.0]], norm)


@pytest.fixture(scope="session")
def gdemo():
    return scalar_instance("piecewise_gdemo")


@pytest.fixture(scope="session")
def remark2():
    return scalar_instance("piecewise_remark2", {"m": -4.0})


@pytest.fixture(scope="session")
def remark2_1():
    return scalar_instance("abs_shift", {"a": 2.0})


@pytest.fixture(scope="session")
def burg():
    return scalar_instance("burg_shift")


@pytest.fixture(scope="session")
def quad2d():
    return quad2d_instance()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
