import numpy as np
import pytest

from spectralflow.curve import Genus0Curve, Genus1Curve, RationalFunction


@pytest.fixture(scope="session")
def airy():
    """X = z^2, Y = z."""
    return Genus0Curve(RationalFunction([0, 0, 1]), RationalFunction([0, 1]))


@pytest.fixture(scope="session")
def joukowski():
    """X = z + 1/z, Y = z (ramification at z = +-1, X-poles at 0, inf)."""
    return Genus0Curve(RationalFunction([1, 0, 1], [0, 1]),
                       RationalFunction([0, 1]))


@pytest.fixture(scope="session")
def torus():
    """tau = i, X = wp, Y = wp'/2."""
    return Genus1Curve(1j, RationalFunction([0.0]), RationalFunction([0.5]))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260811)
