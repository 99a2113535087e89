"""Rising moments, variance, MGF and the Case I limit constants.

Every quantity is an integral of the form

    r * int_0^inf [1 - prod_j P(m, w_j t)] t^{r-1} dt,

where P(m, y) = 1 - Q(m, y) is the Erlang(m) distribution function and the
weights w_j are the coupon probabilities (moments of T_m(N)) or the raw
sequence terms a_j (normalized integrals and limit constants).  The range is
cut at a point T* beyond which the tail is bounded in closed form using
1 - prod(1 - q_j) <= sum q_j, and [0, T*] is handled by adaptive quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from .errors import DichotomyError, InvalidParameter, UnsupportedOperation
from .quadrature import integrate, integrate_halfline
from .seqmodel import (
    Case,
    CouponModel,
    Kind,
    MomentEstimate,
    SequenceFamily,
    classify,
)
from .special import erlang_survival, log_erlang_cdf

__all__ = [
    "MomentEstimate",
    "survival_product",
    "rising_moment",
    "internal_integral",
    "expectation",
    "second_rising",
    "variance",
    "mgf",
    "limit_constant",
    "truncation_bound",
    "tail_sum_bound",
]

LOG_UNDERFLOW = -745.0
_CHUNK_ELEMS = 2_000_000


def _grouped(weights):
    w, c = np.unique(np.asarray(weights, dtype=float), return_counts=True)
    return w, c.astype(float)


def _log_product(w, c, m, t):
    """sum_k c_k log P(m, w_k t) for every t, clamped below at -745."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    step = max(1, _CHUNK_ELEMS // max(1, len(w)))
    for s in range(0, len(t), step):
        tt = t[s:s + step]
        y = tt[:, None] * w[None, :]
        logs = log_erlang_cdf(m, y.ravel()).reshape(y.shape)
        out[s:s + step] = logs @ c
    return np.maximum(out, LOG_UNDERFLOW)


def _one_minus_product(w, c, m, t):
    return -np.expm1(_log_product(w, c, m, t))


def survival_product(model: CouponModel, m: int, t):
    """P{X <= t} = prod_j [1 - Q(m, p_j t)] for the Poissonized completion time X."""
    _check_m(m)
    w, c = _grouped(model.probs)
    out = np.exp(_log_product(w, c, m, t))
    out = np.where(np.atleast_1d(np.asarray(t, dtype=float)) <= 0, 0.0, out)
    out = np.where(out <= math.exp(LOG_UNDERFLOW), 0.0, out)
    return float(out[0]) if np.ndim(t) == 0 else out


def _check_m(m):
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidParameter(f"m must be a positive integer, got {m!r}")


def _check_tol(tol):
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol!r}")


def _rising_tail(w, c, m, r, T):
    """Closed form of sum_k c_k * r * int_T^inf Q(m, w_k t) t^{r-1} dt."""
    total = np.zeros_like(w)
    for l in range(m):
        coef = math.exp(math.lgamma(l + r) - math.lgamma(l + 1))
        total += coef * np.atleast_1d(erlang_survival(l + r, w * T))
    return float(np.sum(c * r * total / w**r))


def _mgf_tail(w, c, m, c0, T):
    """Bound on c0 * int_T^inf [1 - prod] e^{-c0 t} dt."""
    acc = np.zeros_like(w)
    for l in range(m):
        acc += w**l / (w + c0) ** (l + 1) * np.atleast_1d(erlang_survival(l + 1, (w + c0) * T))
    return min(math.exp(-c0 * T), c0 * float(np.sum(c * acc)))


def _cut_point(w, m, tail, tol, n):
    T = (m + math.log(max(n, 1)) + 1.0) / w.min()
    bound = tail(T)
    for _ in range(200):
        if bound <= tol:
            break
        T *= 2.0
        bound = tail(T)
    return T, bound


def _weighted_rising(weights, m, r, tol, what):
    _check_m(m)
    _check_tol(tol)
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise InvalidParameter(f"r must be a positive integer, got {r!r}")
    w, c = _grouped(weights)
    n = float(c.sum())
    T, tail = _cut_point(w, m, lambda T: _rising_tail(w, c, m, r, T), tol / 2, n)

    def f(t):
        return _one_minus_product(w, c, m, t) * (r * t ** (r - 1) if r > 1 else 1.0)

    q = integrate(f, 0.0, T, tol / 2)
    return MomentEstimate(
        q.value,
        q.abs_error + tail,
        "quadrature",
        f"{what}: r={r}, m={m}, T*={T:.6g}, tail<={tail:.3g}, quad_err<={q.abs_error:.3g}, "
        f"intervals={q.intervals}",
    )


def rising_moment(model: CouponModel, m: int, r: int, tol: float = 1e-8) -> MomentEstimate:
    """E[T (T+1) ... (T+r-1)] for T = T_m(N)."""
    return _weighted_rising(model.probs, m, r, tol, "rising moment")


def internal_integral(weights, m: int, r: int = 1, tol: float = 1e-8) -> MomentEstimate:
    """The same integral with unnormalized weights a_1..a_N.

    For r = 1 this is E_m(N; alpha), for r = 2 it is Q_m(N; alpha); both
    scale as s^{-r} when the weights are multiplied by s, and
    E[T^(r)] = A_N^r * internal_integral.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0 or np.any(~(weights > 0)):
        raise InvalidParameter("weights must be a nonempty vector of positive reals")
    return _weighted_rising(weights, m, r, tol, "normalized integral")


def expectation(model: CouponModel, m: int, tol: float = 1e-8) -> MomentEstimate:
    return rising_moment(model, m, 1, tol)


def second_rising(model: CouponModel, m: int, tol: float = 1e-8) -> MomentEstimate:
    """E[T (T+1)]."""
    return rising_moment(model, m, 2, tol)


def variance(model: CouponModel, m: int, tol: float = 1e-8) -> MomentEstimate:
    """V[T] = E[T(T+1)] - E[T] - E[T]^2 with propagated error."""
    _check_tol(tol)
    e1 = expectation(model, m, tol / 4)
    scale = 2 * abs(e1.value) + 1
    if scale * e1.abs_error > tol / 2:
        e1 = expectation(model, m, tol / (2 * scale))
    e2 = second_rising(model, m, tol / 2)
    E = e1.value
    value = e2.value - E - E * E
    err = e2.abs_error + (2 * abs(E) + 1) * e1.abs_error + e1.abs_error**2
    return MomentEstimate(value, err, "quadrature", f"E[T(T+1)]={e2.value!r}, E[T]={E!r}")


def mgf(model: CouponModel, m: int, z: float, tol: float = 1e-8) -> MomentEstimate:
    """G(z) = E[z^{-T}] for real z > 1."""
    _check_m(m)
    _check_tol(tol)
    if not z > 1:
        raise InvalidParameter(f"mgf needs real z > 1, got {z!r}")
    c0 = z - 1.0
    w, c = _grouped(model.probs)
    T, tail = _cut_point(w, m, lambda T: _mgf_tail(w, c, m, c0, T), tol / 2, model.n)

    def f(t):
        return _one_minus_product(w, c, m, t) * np.exp(-c0 * t)

    q = integrate(f, 0.0, T, tol / (2 * c0))
    value = 1.0 - c0 * q.value
    return MomentEstimate(value, c0 * q.abs_error + tail, "quadrature", f"z={z!r}, T*={T:.6g}")


# ---------------------------------------------------------------------------
# Case I limit constants


def tail_sum_bound(family: SequenceFamily, m: int, J: int, t):
    """Upper bound on sum_{j>J} Q(m, a_j t) by comparison with int_J^inf.

    Requires a nondecreasing sequence (power or exponential growth).
    """
    t = np.asarray(t, dtype=float)
    p = family.p
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if family.kind is Kind.POWER:
            U = J**p * t
            acc = sum(
                sp.gamma(l + 1 / p) * sp.gammaincc(l + 1 / p, U) / math.factorial(l)
                for l in range(m)
            )
            out = acc * t ** (-1 / p) / p
        elif family.kind is Kind.EXP_GROWTH:
            U = math.exp(p * J) * t
            acc = sp.exp1(U)
            for l in range(1, m):
                acc = acc + erlang_survival(l, U) / l
            out = acc / p
        else:
            raise UnsupportedOperation(f"no tail comparison integral for {family.label()}")
    return np.where(t > 0, np.nan_to_num(out, nan=np.inf, posinf=np.inf), np.inf)


def _crude_tail(family, m, r, J):
    """The integrated bound c(m, r) * sum_{j>J} a_j^{-r}, or inf if divergent."""
    coef = r * sum(math.exp(math.lgamma(l + r) - math.lgamma(l + 1)) for l in range(m))
    p = family.p
    if family.kind is Kind.POWER:
        if p * r <= 1:
            return math.inf
        return coef * J ** (1 - p * r) / (p * r - 1)
    return coef * math.exp(-p * r * J) / (p * r)


def truncation_bound(family: SequenceFamily, m: int, r: int, J: int, tol: float) -> float:
    """Bound on L_r - (integral with the first J weights).

    The gap equals int P_J(t) [1 - prod_{j>J}(1 - q_j)] r t^{r-1} dt, and the
    bracket is at most min(1, sum_{j>J} q_j).  The resulting integral is
    evaluated numerically and its quadrature error added.  It never exceeds
    the integrated form m * sum 1/a_j (r = 1) or m(m+1) sum 1/a_j^2 (r = 2).
    """
    a = family.terms(J)
    w, c = _grouped(a)

    def f(t):
        head = np.exp(_log_product(w, c, m, t))
        s = np.minimum(1.0, tail_sum_bound(family, m, J, t))
        return head * s * (r * t ** (r - 1) if r > 1 else 1.0)

    scale = (m + math.log(J) + 1.0) / a.min()
    q = integrate_halfline(f, 0.0, scale, tol / 4)
    return min(q.value + q.abs_error, _crude_tail(family, m, r, J))


def _require_case1(family):
    label = classify(family)
    if label.value is Case.CASE_II:
        raise DichotomyError(family)
    if family.kind is Kind.EXPLICIT:
        raise UnsupportedOperation("explicit lists are finite; L_r needs the infinite tail")


def limit_constant(family: SequenceFamily, m: int, r: int, tol: float = 1e-8,
                   max_terms: int = 1 << 22) -> MomentEstimate:
    """L_r(alpha; m) = r int_0^inf {1 - prod_{j>=1} [1 - Q(m, a_j t)]} t^{r-1} dt."""
    _check_m(m)
    _check_tol(tol)
    _require_case1(family)
    J = 16
    while True:
        bound = truncation_bound(family, m, r, J, tol)
        if bound <= tol / 2:
            break
        if 2 * J > max_terms:
            raise UnsupportedOperation(
                f"truncation bound {bound:.3g} still above tol/2 with {J} terms"
            )
        J *= 2
    head = _weighted_rising(family.terms(J), m, r, tol / 2, "limit constant")
    crude = _crude_tail(family, m, r, J)
    return MomentEstimate(
        head.value,
        head.abs_error + bound,
        "quadrature",
        f"L_{r}({family.label()}; m={m}) with J={J} terms, truncation<={bound:.3g}"
        f" (integrated bound {crude:.3g}); {head.detail}",
    )
