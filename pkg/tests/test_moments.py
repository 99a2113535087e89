import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dixiecup.errors import DichotomyError, InvalidParameter, UnsupportedOperation
from dixiecup.moments import (
    expectation,
    internal_integral,
    limit_constant,
    mgf,
    rising_moment,
    second_rising,
    survival_product,
    truncation_bound,
    variance,
)
from dixiecup.seqmodel import CouponModel, SequenceFamily, build_model
from dixiecup.simulate import exact_small
from oracles import equal_variance, expectation_m1, pgf_m1, second_rising_m1

SMALL = [[1.0], [0.5, 0.5], [1 / 3, 2 / 3], [0.2, 0.3, 0.5]]
SMALL_EXACT = [[Fraction(1)], [Fraction(1, 2)] * 2, [Fraction(1, 3), Fraction(2, 3)],
               [Fraction(1, 5), Fraction(3, 10), Fraction(1, 2)]]


def model(p):
    return CouponModel.from_probs(p)


def test_survival_product_examples():
    assert survival_product(model([1.0]), 1, math.log(2)) == pytest.approx(0.5, rel=1e-15)
    assert survival_product(model([0.5, 0.5]), 1, 2.0) == pytest.approx((1 - math.exp(-1)) ** 2, rel=1e-14)
    for m in (1, 3):
        assert survival_product(model([0.2, 0.3, 0.5]), m, 0.0) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=8), st.integers(1, 4))
def test_survival_product_monotone(weights, m):
    p = np.array(weights) / math.fsum(weights)
    mod = model(p / p.sum())
    t = np.linspace(0.0, 60.0, 200)
    v = survival_product(mod, m, t)
    assert np.all(np.diff(v) >= -1e-15)
    assert np.all((v >= 0) & (v <= 1))


def test_survival_product_more_coupons_is_smaller():
    fam = SequenceFamily.zipf(0.8)
    t = np.linspace(0.5, 400.0, 50)
    for n in (3, 10, 40):
        # fixed raw weights: compare prod_{j<=n} vs prod_{j<=n+1} of the unnormalized kernel
        a_n = fam.terms(n)
        a_n1 = fam.terms(n + 1)
        from dixiecup.moments import _grouped, _log_product
        w, c = _grouped(a_n)
        w1, c1 = _grouped(a_n1)
        assert np.all(_log_product(w1, c1, 1, t) <= _log_product(w, c, 1, t) + 1e-15)


def test_rising_examples():
    assert rising_moment(model([1.0]), 3, 1).value == pytest.approx(3, abs=1e-8)
    assert expectation(model([1.0]), 5).value == pytest.approx(5, abs=1e-8)
    assert expectation(model([0.5, 0.5]), 1).value == pytest.approx(3, abs=1e-8)
    assert expectation(model([1 / 3, 2 / 3]), 1).value == pytest.approx(3.5, abs=1e-8)
    assert expectation(build_model(SequenceFamily.constant(), 3), 1).value == pytest.approx(5.5, abs=1e-8)
    assert second_rising(model([1.0]), 3).value == pytest.approx(12, abs=1e-8)
    assert second_rising(model([1.0]), 1).value == pytest.approx(2, abs=1e-8)
    assert second_rising(model([0.5, 0.5]), 1).value == pytest.approx(14, abs=1e-8)


@pytest.mark.parametrize("p,pf", list(zip(SMALL, SMALL_EXACT)))
def test_m1_against_inclusion_exclusion(p, pf):
    mod = model(p)
    e = expectation(mod, 1, 1e-10)
    e2 = second_rising(mod, 1, 1e-10)
    assert abs(e.value - float(expectation_m1(pf))) <= 1e-10 + 1e-13 * e.value
    assert abs(e2.value - float(second_rising_m1(pf))) <= 1e-10 + 1e-13 * e2.value
    for z in (1.25, 2.0, 5.0):
        g = mgf(mod, 1, z, 1e-10)
        assert abs(g.value - float(pgf_m1(pf, z))) <= 1e-10


@pytest.mark.parametrize("p", SMALL)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_against_markov_chain(p, m):
    mod = model(p)
    ex = exact_small(mod, m)
    e = expectation(mod, m, 1e-8)
    e2 = second_rising(mod, m, 1e-8)
    v = variance(mod, m, 1e-8)
    assert e.abs_error <= 1e-8 and abs(e.value - ex.expectation) <= 1e-8 + e.abs_error
    assert abs(e2.value - ex.second_rising) <= 1e-8 + e2.abs_error
    assert abs(v.value - ex.variance) <= 1e-8 + v.abs_error


def test_variance_examples():
    for m in (1, 2, 4):
        assert abs(variance(model([1.0]), m).value) <= 1e-7
    assert variance(model([0.5, 0.5]), 1).value == pytest.approx(2.0, abs=1e-8)
    v = variance(build_model(SequenceFamily.constant(), 10), 1, 1e-8)
    assert v.value == pytest.approx(float(equal_variance(10)), abs=1e-7)


def test_mgf_examples():
    assert mgf(model([1.0]), 1, 2.0).value == pytest.approx(0.5, abs=1e-8)
    assert mgf(model([1.0]), 2, 2.0).value == pytest.approx(0.25, abs=1e-8)
    assert mgf(model([0.5, 0.5]), 1, 2.0).value == pytest.approx(1 / 6, abs=1e-8)
    with pytest.raises(InvalidParameter):
        mgf(model([1.0]), 1, 1.0)


@pytest.mark.parametrize("p", SMALL[1:])
@pytest.mark.parametrize("m", [1, 2])
def test_mgf_decreasing_in_z(p, m):
    mod = model(p)
    z = [1.05, 1.3, 2.0, 3.5, 8.0]
    g = [mgf(mod, m, zz, 1e-11).value for zz in z]
    assert all(0 < x < 1 for x in g)
    assert all(a > b for a, b in zip(g, g[1:]))


def test_expectation_increasing_in_m_and_n():
    fam = SequenceFamily.zipf(1.0)
    for n in (2, 3, 6):
        values = [expectation(build_model(fam, n), m).value for m in (1, 2, 3)]
        assert values[0] < values[1] < values[2]
    for m in (1, 2):
        # along the raw sequence: one more coupon cannot shorten collection
        vals = [internal_integral(fam.terms(n), m).value for n in (2, 3, 6, 12)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=6), st.integers(1, 3))
def test_variance_nonnegative(weights, m):
    p = np.array(weights) / math.fsum(weights)
    mod = model(p / p.sum())
    e = expectation(mod, m, 1e-9).value
    e2 = second_rising(mod, m, 1e-9).value
    assert e2 >= e * e + e - 1e-6 * e2


def test_internal_integral_scaling():
    a = SequenceFamily.zipf(0.5).terms(20)
    one = internal_integral(a, 2, 1, 1e-10).value
    two = internal_integral(2 * a, 2, 1, 1e-10).value
    assert two == pytest.approx(one / 2, rel=1e-9)
    q1 = internal_integral(a, 2, 2, 1e-10).value
    q2 = internal_integral(2 * a, 2, 2, 1e-10).value
    assert q2 == pytest.approx(q1 / 4, rel=1e-9)
    m1 = build_model(SequenceFamily.explicit(a, "decays-subexponential"), 20)
    m2 = build_model(SequenceFamily.explicit(2 * a, "decays-subexponential"), 20)
    assert expectation(m1, 2).value == pytest.approx(expectation(m2, 2).value, rel=1e-12)


def _brute_force_L(family, m, r, J):
    a = family.terms(J)

    def f(t):
        from dixiecup.special import log_erlang_cdf
        return (1 - math.exp(float(np.sum(log_erlang_cdf(m, a * t))))) * r * t ** (r - 1)

    val, _ = quad(f, 0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=500)
    return val


@pytest.mark.parametrize("r", [1, 2])
def test_limit_constant_power2(r):
    fam = SequenceFamily.power(2.0)
    tol = 1e-8
    est = limit_constant(fam, 1, r, tol)
    assert est.abs_error <= tol
    J = int(est.detail.split("J=")[1].split()[0])
    brute = _brute_force_L(fam, 1, r, 2 * J)
    assert abs(est.value - brute) <= 2 * tol


@pytest.mark.parametrize("fam", [SequenceFamily.power(2.0), SequenceFamily.power(1.0),
                                 SequenceFamily.exp_growth(0.5)], ids=lambda f: f.label())
@pytest.mark.parametrize("m", [1, 2])
def test_L2_exceeds_L1_squared(fam, m):
    L1 = limit_constant(fam, m, 1, 1e-9)
    L2 = limit_constant(fam, m, 2, 1e-9)
    assert L2.value - L1.value**2 > L2.abs_error + 3 * L1.value * L1.abs_error


def test_limit_constant_dichotomy():
    with pytest.raises(DichotomyError):
        limit_constant(SequenceFamily.zipf(1.0), 1, 1)
    with pytest.raises(UnsupportedOperation):
        limit_constant(SequenceFamily.explicit([1.0, 4.0, 9.0], "grows"), 1, 1)


@pytest.mark.parametrize("J", [8, 32])
def test_truncation_bound_brackets_constant(J):
    fam = SequenceFamily.power(1.5)
    L = limit_constant(fam, 2, 1, 1e-9)
    head = internal_integral(fam.terms(J), 2, 1, 1e-10)
    bound = truncation_bound(fam, 2, 1, J, 1e-10)
    gap = L.value - head.value
    assert -1e-8 <= gap <= bound + 1e-8
    # refined bound never worse than the integrated form 2 * sum_{j>J} j^{-1.5}
    assert bound <= 2 * 2 * J**-0.5 + 1e-12
