import math

import numpy as np
import pytest

from dixiecup.errors import DichotomyError, UnsupportedOperation
from dixiecup.limitdist import (
    Law,
    LawKind,
    Normalization,
    case1_limit_cdf,
    gumbel_normalization,
    lambda_functional,
    limit_cdf,
)
from dixiecup.seqmodel import SequenceFamily, a_sum_exact, build_model
from dixiecup.special import gumbel_cdf

Y = np.linspace(-6, 12, 400)


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("law", ["gumbel", "slow-0.5", "slow-1", "slow-2"])
def test_limit_cdf_is_cdf(m, law):
    L = Law.gumbel(m) if law == "gumbel" else Law.slow_decay(m, float(law.split("-")[1]))
    F = limit_cdf(L, Y)
    assert np.all(np.diff(F) >= 0)
    assert limit_cdf(L, -40.0) == pytest.approx(0.0, abs=1e-12)
    assert limit_cdf(L, 60.0) == pytest.approx(1.0, abs=1e-12)


def test_limit_cdf_examples():
    assert limit_cdf(Law.gumbel(1), 0.0) == pytest.approx(math.exp(-1))
    assert limit_cdf(Law.slow_decay(1, 1.0), 1.0) == pytest.approx(math.exp(-0.5), rel=1e-14)
    for m in (1, 3):
        for p in (1e-8, 1e-10):
            assert np.allclose(limit_cdf(Law.slow_decay(m, p), Y), limit_cdf(Law.gumbel(m), Y), atol=1e-7)
    with pytest.raises(UnsupportedOperation):
        limit_cdf(Law(LawKind.CASE_I_FIXED_POINT, 1), 0.0)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_gumbel_location_identity(m):
    # dividing by (m-1)! shifts the standard law left by ln(m-1)!
    shifted = np.exp(-np.exp(-(Y + math.lgamma(m))))
    assert np.allclose(limit_cdf(Law.gumbel(m), Y), shifted, rtol=1e-13, atol=1e-300)
    assert np.allclose(limit_cdf(Law.gumbel(m), Y), gumbel_cdf(Y, m), rtol=1e-13)


def test_normalization_examples():
    fam = SequenceFamily.zipf(0.5)
    nm = gumbel_normalization(fam, 1, 100)
    A = a_sum_exact(fam, 100)
    assert nm.k_n == pytest.approx(A * 10, rel=1e-14)
    assert nm.b_n == pytest.approx(A * 10 * (math.log(100) - math.log(math.log(100)) - math.log(0.5)), rel=1e-14)
    n = 10**4
    nm = gumbel_normalization(SequenceFamily.constant(), 2, n)
    assert nm.b_n == pytest.approx(n * math.log(n) + n * math.log(math.log(n)), rel=1e-14)
    assert nm.k_n == n and nm.law == Law.gumbel(2)
    nm = gumbel_normalization(SequenceFamily.log_power(1.0), 1, 10**5)
    assert nm.law.kind is LawKind.SLOW_DECAY_GUMBEL and nm.law.p == 1.0
    # 0 < p < 1 display: k_n ~ N/(1-p)
    n = 10**6
    nm = gumbel_normalization(fam, 2, n)
    assert nm.k_n / (n / 0.5) == pytest.approx(1.0, abs=5e-3)
    assert nm.to_dict() == {"b": nm.b_n, "k": nm.k_n, "law": "gumbel", "m": 2}
    with pytest.raises(UnsupportedOperation):
        gumbel_normalization(SequenceFamily.power(2.0), 1, 100)


@pytest.mark.parametrize("fam", [SequenceFamily.zipf(0.5), SequenceFamily.constant(),
                                 SequenceFamily.log_power(1.0)], ids=lambda f: f.label())
def test_k_over_b_decreases(fam):
    r = [gumbel_normalization(fam, 1, n) for n in (10**2, 10**3, 10**4, 10**5)]
    ratios = [x.k_n / x.b_n for x in r]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_normalization_requires_positive_scale():
    with pytest.raises(ValueError):
        Normalization(1.0, 0.0, Law.gumbel(1))


def test_lambda_constant_exact():
    n = 500
    model = build_model(SequenceFamily.constant(), n)
    for y in (-1.0, 0.0, 2.5):
        v = lambda_functional(model, 1, n * math.log(n), n, y)
        assert v == pytest.approx(math.exp(-y), rel=1e-12)


def test_lambda_decreasing_and_vanishing():
    fam = SequenceFamily.zipf(0.5)
    model = build_model(fam, 1000)
    for m in (1, 2):
        nm = gumbel_normalization(fam, m, 1000)
        y = np.linspace(-1, 8, 40)
        v = lambda_functional(model, m, nm.b_n, nm.k_n, y)
        assert np.all(np.diff(v) < 0)
        assert lambda_functional(model, m, nm.b_n, nm.k_n, 200.0) < 1e-50


def test_lambda_zipf_example_and_trend():
    fam = SequenceFamily.zipf(0.5)
    for m in (1, 2):
        gaps = []
        for n in (10**2, 10**3, 10**4, 10**5):
            nm = gumbel_normalization(fam, m, n)
            v = lambda_functional(build_model(fam, n), m, nm.b_n, nm.k_n, 0.0)
            gaps.append(abs(v - 1 / math.factorial(m - 1)))
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        if m == 1:
            assert gaps[2] < 0.15


def test_case1_cdf_examples():
    fam = SequenceFamily.power(2.0)
    assert case1_limit_cdf(fam, 1, 0.0) == 0.0
    assert case1_limit_cdf(fam, 1, 40.0) == pytest.approx(1.0, abs=1e-12)
    s = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    F = case1_limit_cdf(fam, 1, s)
    assert np.all(np.diff(F) > 0) and np.all((F > 0) & (F < 1))
    tol = 1e-10
    j = np.arange(1, 400_001, dtype=float)
    direct = math.exp(math.fsum(np.log1p(-np.exp(-(j**2) * 1.0))))
    assert abs(case1_limit_cdf(fam, 1, 1.0, tol) - direct) <= 2 * tol
    with pytest.raises(DichotomyError):
        case1_limit_cdf(SequenceFamily.zipf(1.0), 1, 1.0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_case1_cdf_self_consistent(m):
    fam = SequenceFamily.power(1.0)
    for s in (0.3, 1.0, 3.0):
        a = case1_limit_cdf(fam, m, s, 1e-9)
        b = case1_limit_cdf(fam, m, s, 1e-12)
        assert abs(a - b) <= 2e-9
