import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from sshdefect.lattice import DefectKind, DefectSpec, LatticeSpec


def multiset_distance(a, b):
    """Largest gap in the best one-to-one matching of two complex multisets."""
    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def asym(g, m=5, n=25, k=0.5, c=1.0):
    return LatticeSpec(n, k, c, DefectSpec(DefectKind.ASYM, m, g))


def pt(gamma, m=5, n=25, k=0.5, c=1.0):
    return LatticeSpec(n, k, c, DefectSpec(DefectKind.PT, m, gamma))


@pytest.fixture
def clean25():
    return LatticeSpec(25, 0.5, 1.0)
