import numpy as np
import pytest

from spinflow import zoo
from spinflow.clifford import build_rep
from spinflow.flow_frame import levi_civita


@pytest.fixture(scope="session")
def rep3():
    return build_rep(3)


@pytest.fixture(scope="session")
def s3():
    return levi_civita(zoo.round_s3().manifold)


@pytest.fixture(scope="session")
def heis():
    return levi_civita(zoo.heisenberg().manifold)


@pytest.fixture(scope="session")
def flat():
    return levi_civita(zoo.flat_r3().manifold)


@pytest.fixture(scope="session")
def s1s2_entry():
    return zoo.s1_x_s2()


@pytest.fixture(scope="session")
def s1s2(s1s2_entry):
    return levi_civita(s1s2_entry.manifold)


def cyclic_brackets(value):
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = value
        c[j, i, k] = -value
    return c
