import numpy as np
import pytest

from trbundle.oracle import OracleInterface, OracleSample


class AbsOracle(OracleInterface):
    """f(x) = |x| in one dimension; two linear branches tagged by sign."""

    @property
    def dim(self):
        return 1

    def query(self, x, order):
        x = np.asarray(x, dtype=float)
        t = float(x[0])
        s = 1.0 if t >= 0 else -1.0
        hess = np.array([[0.0]]) if order == 2 else None
        return OracleSample(base=x, value=abs(t), grad=np.array([s]), hess=hess,
                            order=order, selector_tag=int(s))

    def eval_value(self, x):
        return abs(float(np.asarray(x, dtype=float).reshape(-1)[0]))

    def eval_values(self, points):
        return np.abs(np.asarray(points, dtype=float).reshape(-1))

    def branch_value(self, tag, z):
        return tag * float(np.asarray(z, dtype=float).reshape(-1)[0])


class LinearOracle(OracleInterface):
    """f(x) = g^T x (unbounded below); used to exercise failure paths."""

    def __init__(self, g):
        self.g = np.asarray(g, dtype=float)

    @property
    def dim(self):
        return self.g.size

    def query(self, x, order):
        x = np.asarray(x, dtype=float)
        hess = np.zeros((self.dim, self.dim)) if order == 2 else None
        return OracleSample(base=x, value=float(self.g @ x), grad=self.g.copy(),
                            hess=hess, order=order, selector_tag=0)

    def eval_value(self, x):
        return float(self.g @ np.asarray(x, dtype=float))

    def branch_value(self, tag, z):
        return self.eval_value(z)


@pytest.fixture
def abs_oracle():
    return AbsOracle()
