"""Closed-form large-N expansions of E[T_m(N)], E[T(T+1)] and V[T_m(N)].

Growing sequences (Case I) reduce to A_N^r times a limit constant.  For
decaying sequences with a_j = 1/f(j), the expansions are series in the small
parameter delta = 1/ln(f(N)/f'(N)); each term is reported separately so that
single coefficients can be checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import DichotomyError, InvalidParameter, UnsupportedOperation
from .moments import limit_constant, truncation_bound
from .seqmodel import (
    Case,
    Kind,
    MomentEstimate,
    SequenceFamily,
    a_sum_exact,
    classify,
    f_derivatives,
)
from .special import EULER_GAMMA, PI2_OVER_6


@dataclass(frozen=True)
class ExpansionReport:
    n: int
    m: int
    terms: tuple[tuple[str, float], ...]
    remainder_order: str
    extras: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return math.fsum(v for _, v in self.terms)

    def term(self, label: str) -> float:
        for name, value in self.terms:
            if name == label:
                return value
        raise KeyError(label)

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "m": self.m,
            "terms": [{"label": k, "value": v} for k, v in self.terms],
            "total": self.total,
            "remainder": self.remainder_order,
        }
        if self.extras:
            d["extras"] = dict(self.extras)
        return d


class Case2Scales(NamedTuple):
    f: float
    F: float
    delta: float
    omega: float


def c1_violations(family: SequenceFamily) -> list[str]:
    """Growth conditions on f that fail for this family (empty for Zipf)."""
    k = family.kind
    if k is Kind.ZIPF:
        return []
    if k is Kind.CONSTANT:
        return ["f' > 0 (f is constant)"]
    if k is Kind.LOG_POWER:
        return ["(iii) (f''/f')/(f'/f) = O(1)", "(iv) f''' f^2 / f'^3 = O(1)"]
    if k is Kind.EXP_DECAY:
        return ["(ii) f'/f -> 0 (f'/f = p)"]
    return ["no smooth decaying interpolant"]


def _check(m, n):
    if not isinstance(m, int) or m < 1:
        raise InvalidParameter(f"m must be a positive integer, got {m!r}")
    if not n >= 1:
        raise InvalidParameter(f"n must be >= 1, got {n!r}")


def case2_scales(family: SequenceFamily, n: float) -> Case2Scales:
    """f(N), F(N) = f ln(f/f'), delta = f/F and omega = -2 + (f''/f')/(f'/f).

    Log-power families are evaluated even though conditions (iii)-(iv) fail
    for them; see :func:`c1_violations`.
    """
    k = family.kind
    if k not in (Kind.ZIPF, Kind.LOG_POWER):
        raise UnsupportedOperation(
            f"delta/F(N) undefined for {family.label()}: violates {', '.join(c1_violations(family))}"
        )
    f, f1, f2 = f_derivatives(family, float(n))
    rho = math.log(f / f1)
    if not rho > 0:
        raise UnsupportedOperation(f"ln(f/f') = {rho:.3g} <= 0 at n = {n}; N too small")
    F = f * rho
    return Case2Scales(f, F, f / F, -2.0 + (f2 / f1) / (f1 / f))


def _require_c1(family):
    bad = c1_violations(family)
    if bad:
        raise UnsupportedOperation(
            f"{family.label()} violates {'; '.join(bad)}; the delta-expansion does not apply"
        )


def expectation_expansion_case2(family: SequenceFamily, m: int, n: int) -> ExpansionReport:
    """Five-term expansion of E[T_m(N)] for f satisfying the growth conditions."""
    _check(m, n)
    _require_c1(family)
    f, _, d, w = case2_scales(family, n)
    pre = a_sum_exact(family, n) * f
    lf = math.lgamma(m)
    ld = math.log(d)
    terms = (
        ("1/delta", pre / d),
        ("-(m-2) ln delta", -pre * (m - 2) * ld),
        ("gamma - ln(m-1)!", pre * (EULER_GAMMA - lf)),
        ("-(m-2)^2 delta ln delta", -pre * (m - 2) ** 2 * d * ld),
        (
            "[(m-1) + omega (m-1)! - (m-2) ln(m-1)! + (m-2) gamma] delta",
            pre * ((m - 1) + w * math.factorial(m - 1) - (m - 2) * lf + (m - 2) * EULER_GAMMA) * d,
        ),
    )
    return ExpansionReport(n, m, terms, "A_N f(N) O(delta^2 ln^2 delta)",
                           {"delta": d, "omega": w, "A_N f(N)": pre})


def second_rising_expansion_case2(family: SequenceFamily, m: int, n: int) -> ExpansionReport:
    """Six-term expansion of E[T_m(N)(T_m(N)+1)]."""
    _check(m, n)
    _require_c1(family)
    f, _, d, w = case2_scales(family, n)
    pre = (a_sum_exact(family, n) * f) ** 2
    lf = math.lgamma(m)
    g = EULER_GAMMA
    ld = math.log(d)
    const = (
        2 * (m - 2) * g
        - 2 * (m - 2) * lf
        + 2 * w * math.factorial(m - 1)
        + 2 * (m - 1)
        + lf**2
        + g**2
        + PI2_OVER_6
        - 2 * g * lf
    )
    terms = (
        ("1/delta^2", pre / d**2),
        ("-2(m-2) ln(delta)/delta", -2 * pre * (m - 2) * ld / d),
        ("-2(ln(m-1)! - gamma)/delta", -2 * pre * (lf - g) / d),
        ("(m-2)^2 ln^2 delta", pre * (m - 2) ** 2 * ld**2),
        ("2(m-2)(ln(m-1)! - gamma - (m-2)) ln delta", 2 * pre * (m - 2) * (lf - g - (m - 2)) * ld),
        ("constant (incl. pi^2/6)", pre * const),
    )
    return ExpansionReport(n, m, terms, "A_N^2 f(N)^2 O(delta ln^2 delta)",
                           {"delta": d, "omega": w, "A_N^2 f(N)^2": pre})


def variance_leading_case2(family: SequenceFamily, m: int, n: int) -> MomentEstimate:
    """(pi^2/6) A_N^2 f(N)^2, the same for every m.

    For log-power sequences the suggested (pi^2/6) N^2 is returned instead.
    """
    _check(m, n)
    k = family.kind
    if k is Kind.ZIPF:
        value = PI2_OVER_6 * (a_sum_exact(family, n) * n**family.p) ** 2
        detail = "(pi^2/6) A_N^2 N^(2p)"
    elif k is Kind.CONSTANT:
        value = PI2_OVER_6 * float(n) ** 2
        detail = "(pi^2/6) N^2 (equal probabilities; conjectural for m > 1)"
    elif k is Kind.LOG_POWER:
        value = PI2_OVER_6 * float(n) ** 2
        detail = "(pi^2/6) N^2 suggested for slowly decaying sequences (not proven)"
    else:
        _require_c1(family)
    return MomentEstimate(value, math.inf, "asymptotic", detail + "; o(1) remainder unquantified")


def equal_case_expansion(m: int, n: int) -> ExpansionReport:
    """E[T_m(N)] = N ln N + (m-1) N ln ln N + N (gamma - ln(m-1)!) + o(N)."""
    _check(m, n)
    if n < 3:
        raise InvalidParameter("equal-case expansion needs n >= 3 (ln ln N > 0)")
    c_m = EULER_GAMMA - math.lgamma(m)
    L = math.log(n)
    terms = (
        ("N ln N", n * L),
        ("(m-1) N ln ln N", (m - 1) * n * math.log(L)),
        ("N (gamma - ln(m-1)!)", n * c_m),
    )
    label = "variance (pi^2/6) N^2 [exact limit for m=1; conjecture for m>1]"
    return ExpansionReport(n, m, terms, "o(N)", {"C_m": c_m, label: PI2_OVER_6 * n * n})


def logpower_expansion(family: SequenceFamily, m: int, n: int) -> ExpansionReport:
    """Suggested mean for a_j = (ln j)^-p: the equal-case form with constant
    gamma + p - ln(p+1) - ln(m-1)!.  Not a theorem; probed empirically only.
    """
    _check(m, n)
    if family.kind is not Kind.LOG_POWER:
        raise InvalidParameter("logpower_expansion needs a logpower family")
    p = family.p
    c = EULER_GAMMA + p - math.log1p(p) - math.lgamma(m)
    L = math.log(n)
    terms = (
        ("N ln N", n * L),
        ("(m-1) N ln ln N", (m - 1) * n * math.log(L)),
        ("N (gamma + p - ln(p+1) - ln(m-1)!)", n * c),
    )
    return ExpansionReport(n, m, terms, "o(N) (suggested form)",
                           {"c_m": c, "variance (pi^2/6) N^2 [suggested]": PI2_OVER_6 * n * n})


def case2_expansion(family: SequenceFamily, m: int, n: int) -> ExpansionReport:
    """Route a decaying family to the expansion that applies to it."""
    k = family.kind
    if k is Kind.CONSTANT:
        return equal_case_expansion(m, n)
    if k is Kind.LOG_POWER:
        return logpower_expansion(family, m, n)
    return expectation_expansion_case2(family, m, n)


# ---------------------------------------------------------------------------
# Case I


def _case1(family):
    label = classify(family)
    if label.value is Case.CASE_II:
        raise DichotomyError(family)


def expectation_expansion_case1(family: SequenceFamily, m: int, n: int,
                                tol: float = 1e-8) -> MomentEstimate:
    """A_N L_1(alpha; m), with error A_N (quadrature error + truncation at N)."""
    _check(m, n)
    _case1(family)
    L1 = limit_constant(family, m, 1, tol)
    A = a_sum_exact(family, n)
    trunc = truncation_bound(family, m, 1, n, tol)
    return MomentEstimate(
        A * L1.value,
        A * (L1.abs_error + trunc),
        "asymptotic",
        f"A_N={A!r}, L1={L1.value!r}, delta_N<={trunc:.3g}",
    )


def variance_case1(family: SequenceFamily, m: int, n: int, tol: float = 1e-8) -> MomentEstimate:
    """A_N^2 (L_2 - L_1^2).

    The error budget covers the truncation gaps of both constants at N and
    the dropped linear term A_N E_m(N; alpha) <= A_N L_1.
    """
    _check(m, n)
    _case1(family)
    L1 = limit_constant(family, m, 1, tol)
    L2 = limit_constant(family, m, 2, tol)
    A = a_sum_exact(family, n)
    d1 = truncation_bound(family, m, 1, n, tol) + L1.abs_error
    d2 = truncation_bound(family, m, 2, n, tol) + L2.abs_error
    value = A * A * (L2.value - L1.value**2)
    err = A * A * (d2 + (2 * L1.value + d1) * d1) + A * (L1.value + L1.abs_error)
    return MomentEstimate(value, err, "asymptotic",
                          f"A_N={A!r}, L1={L1.value!r}, L2={L2.value!r}")


# ---------------------------------------------------------------------------


def j_kappa(family: SequenceFamily, n: float, s: float, kappa: float) -> float:
    """Two-term approximation of int_1^N f(x)^kappa exp(-F(N) s / f(x)) dx."""
    if not s >= 0.1:
        raise InvalidParameter("j_kappa is uniform only for s >= s0 > 0; use s >= 0.1")
    f, f1, _ = f_derivatives(family, float(n))
    _, F, _, w = case2_scales(family, n)
    e = math.exp(-F * s / f)
    first = f ** (kappa + 2) / (s * F * f1) * e
    second = w * f ** (kappa + 3) / (s * s * F * F * f1) * e
    return first + second
