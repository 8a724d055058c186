import numpy as np
import pytest

import signopt as so

MEDIAN_DATA = (4.45, 14.99, 24.28, 26.21, 44.24, 58.61, 68.78, 75.49)


@pytest.fixture
def ring4():
    return so.ring(4, 1.0)


@pytest.fixture
def example1_locals():
    return tuple(so.AbsDeviation(s) for s in (0.0, 2.0, 4.0, 6.0))


@pytest.fixture
def example1(ring4, example1_locals):
    """4-node unit ring with absolute-deviation targets 0, 2, 4, 6."""
    return so.ProblemInstance(ring4, example1_locals, 1.05)


def median_problem(alpha: float, lam: float) -> so.ProblemInstance:
    """8-node unit ring, quantile locals over the 8 reference samples."""
    locs = tuple(so.Quantile(alpha, y, 1.0) for y in MEDIAN_DATA)
    return so.ProblemInstance(so.ring(8, 1.0), locs, lam)


@pytest.fixture
def median8():
    return median_problem(0.5, 2.0)


def random_state(rng, n, lo=-10.0, hi=10.0):
    return rng.uniform(lo, hi, size=n)
