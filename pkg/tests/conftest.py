import numpy as np
import pytest

from mogdm.core import BoxProblem, SolverParams
from mogdm.problems import convex_pair


def _parabola_pair() -> BoxProblem:
    # f = (z^2, (z - 1)^2) on [-2, 3]; efficient set [0, 1]
    return BoxProblem(
        name="PARABOLA",
        lb=np.array([-2.0]),
        ub=np.array([3.0]),
        m=2,
        objectives=lambda z: np.array([z[0] ** 2, (z[0] - 1.0) ** 2]),
        jacobian=lambda z: np.array([[2.0 * z[0]], [2.0 * (z[0] - 1.0)]]),
    )


@pytest.fixture
def parabola():
    return _parabola_pair()


@pytest.fixture
def convex5():
    return convex_pair(5)


@pytest.fixture
def convex2():
    return convex_pair(2, -1.0, 1.0)


@pytest.fixture
def params():
    return SolverParams()


@pytest.fixture
def out_dir(tmp_path):
    d = tmp_path / "results"
    d.mkdir()
    return d
