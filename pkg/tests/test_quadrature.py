import math

import numpy as np
import pytest
from scipy.integrate import quad

from dixiecup.errors import ToleranceNotMet
from dixiecup.quadrature import NODES, W_GAUSS, W_KRONROD, integrate, integrate_halfline


def test_rule_weights():
    assert W_KRONROD.sum() == pytest.approx(2.0, abs=1e-15)
    assert W_GAUSS.sum() == pytest.approx(2.0, abs=1e-15)
    # Kronrod rule is exact for degree 22
    assert NODES**22 @ W_KRONROD == pytest.approx(2 / 23, rel=1e-13)


@pytest.mark.parametrize("f,a,b", [
    (np.sin, 0.0, math.pi),
    (lambda x: np.exp(-x * x), -3.0, 5.0),
    (lambda x: np.sqrt(x), 0.0, 2.0),
    (lambda x: 1 / (1 + 100 * (x - 0.3) ** 2), 0.0, 1.0),
])
def test_against_scipy(f, a, b):
    ref, _ = quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)
    res = integrate(f, a, b, 1e-10)
    assert abs(res.value - ref) <= 1e-10
    assert res.abs_error <= 1e-10


def test_halfline():
    res = integrate_halfline(lambda t: np.exp(-t) * t**2, 0.0, 3.0, 1e-10)
    assert res.value == pytest.approx(2.0, abs=1e-10)


def test_budget_exhaustion_carries_estimate():
    with pytest.raises(ToleranceNotMet) as info:
        integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0.0, 1.0, 1e-14, max_intervals=64)
    assert math.isfinite(info.value.estimate)
    assert info.value.bound > 1e-14


def test_empty_interval():
    assert integrate(np.sin, 1.0, 1.0, 1e-8).value == 0.0
