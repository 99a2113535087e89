"""Coupon-weight sequences, finite coupon models and the growth dichotomy.

A :class:`SequenceFamily` describes an infinite positive sequence a_1, a_2, ...
(for ``logpower`` the sequence starts at j = 2).  Normalizing its first N
terms gives the coupon probabilities of a :class:`CouponModel`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, UnclassifiedError, UnsupportedOperation
from .special import EULER_GAMMA, zeta


class Kind(str, enum.Enum):
    CONSTANT = "constant"
    POWER = "power"
    ZIPF = "zipf"
    EXP_GROWTH = "exp-growth"
    EXP_DECAY = "exp-decay"
    LOG_POWER = "logpower"
    EXPLICIT = "explicit"


TAIL_HINTS = ("grows", "decays-subexponential", "decays-exponential")

_JSON_KIND = {
    "constant": Kind.CONSTANT,
    "power": Kind.POWER,
    "zipf": Kind.ZIPF,
    "exp-growth": Kind.EXP_GROWTH,
    "exp_growth": Kind.EXP_GROWTH,
    "exp-decay": Kind.EXP_DECAY,
    "exp_decay": Kind.EXP_DECAY,
    "logpower": Kind.LOG_POWER,
    "log-power": Kind.LOG_POWER,
    "explicit": Kind.EXPLICIT,
}


@dataclass(frozen=True)
class SequenceFamily:
    kind: Kind
    p: float | None = None
    values: tuple[float, ...] | None = None
    tail: str | None = None

    def __post_init__(self):
        if self.kind in (Kind.CONSTANT, Kind.EXPLICIT):
            if self.p is not None:
                raise InvalidParameter(f"{self.kind.value} family takes no p")
        else:
            if self.p is None or not (self.p > 0) or not math.isfinite(self.p):
                raise InvalidParameter(f"{self.kind.value} family needs a finite p > 0, got {self.p!r}")
        if self.kind is Kind.EXPLICIT:
            if not self.values:
                raise InvalidParameter("explicit family needs a nonempty list of weights")
            if any(not (v > 0) or not math.isfinite(v) for v in self.values):
                raise InvalidParameter("explicit weights must be finite and strictly positive")
            if self.tail is not None and self.tail not in TAIL_HINTS:
                raise InvalidParameter(f"tail hint must be one of {TAIL_HINTS}, got {self.tail!r}")
        elif self.tail is not None:
            raise InvalidParameter("tail hints apply to explicit families only")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls):
        return cls(Kind.CONSTANT)

    @classmethod
    def power(cls, p):
        return cls(Kind.POWER, float(p))

    @classmethod
    def zipf(cls, p):
        return cls(Kind.ZIPF, float(p))

    @classmethod
    def exp_growth(cls, p):
        return cls(Kind.EXP_GROWTH, float(p))

    @classmethod
    def exp_decay(cls, p):
        return cls(Kind.EXP_DECAY, float(p))

    @classmethod
    def log_power(cls, p):
        return cls(Kind.LOG_POWER, float(p))

    @classmethod
    def explicit(cls, values, tail=None):
        return cls(Kind.EXPLICIT, None, tuple(float(v) for v in values), tail)

    # evaluation ---------------------------------------------------------
    @property
    def first_index(self) -> int:
        return 2 if self.kind is Kind.LOG_POWER else 1

    @property
    def is_parametric(self) -> bool:
        return self.kind is not Kind.EXPLICIT

    def weights(self, j):
        """a_j at (integer or real) indices j; vectorized."""
        j = np.asarray(j, dtype=float)
        k, p = self.kind, self.p
        if k is Kind.CONSTANT:
            return np.ones_like(j)
        if k is Kind.POWER:
            return j**p
        if k is Kind.ZIPF:
            return j ** (-p)
        if k is Kind.EXP_GROWTH:
            return np.exp(p * j)
        if k is Kind.EXP_DECAY:
            return np.exp(-p * j)
        if k is Kind.LOG_POWER:
            return np.log(j) ** (-p)
        idx = j.astype(int) - 1
        if np.any(idx < 0) or np.any(idx >= len(self.values)):
            raise InvalidParameter(f"explicit family has only {len(self.values)} terms")
        return np.asarray(self.values)[idx]

    def terms(self, n: int) -> np.ndarray:
        """The n weights used by a model of size n."""
        start = self.first_index
        return self.weights(np.arange(start, start + n))

    def label(self) -> str:
        if self.kind is Kind.CONSTANT:
            return "constant"
        if self.kind is Kind.EXPLICIT:
            return f"explicit[{len(self.values)}]"
        return f"{self.kind.value}(p={self.p:g})"

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.p is not None:
            d["p"] = self.p
        if self.values is not None:
            d["a"] = list(self.values)
        if self.tail is not None:
            d["tail"] = self.tail
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceFamily":
        try:
            kind = _JSON_KIND[str(d["kind"]).lower()]
        except KeyError as exc:
            raise InvalidParameter(f"unknown family kind {d.get('kind')!r}") from exc
        if kind is Kind.EXPLICIT:
            return cls.explicit(d.get("a") or (), d.get("tail"))
        p = d.get("p")
        return cls(kind, None if p is None else float(p))


@dataclass(frozen=True)
class CouponModel:
    n: int
    probs: np.ndarray = field(repr=False)
    a_sum: float
    source: SequenceFamily | None = None

    def __post_init__(self):
        self.probs.setflags(write=False)

    @property
    def p_min(self) -> float:
        return float(self.probs.min())

    @property
    def is_equal(self) -> bool:
        lo, hi = self.probs.min(), self.probs.max()
        return bool(hi - lo <= 4e-16 * hi)

    @classmethod
    def from_probs(cls, probs) -> "CouponModel":
        """Model from a probability vector (normalized again by compensated sum)."""
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidParameter("probability vector must be one-dimensional and nonempty")
        if np.any(~(probs > 0)) or not np.all(np.isfinite(probs)):
            raise InvalidParameter("probabilities must be finite and strictly positive")
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameter(f"probabilities sum to {total!r}, not 1")
        return cls(len(probs), probs / total, total, None)

    def to_dict(self) -> dict:
        return {"n": self.n, "probs": self.probs.tolist(), "a_sum": self.a_sum}

    @classmethod
    def from_dict(cls, d: dict) -> "CouponModel":
        probs = np.asarray(d["probs"], dtype=float)
        if len(probs) != int(d["n"]):
            raise InvalidParameter("n does not match the length of probs")
        return cls(int(d["n"]), probs, float(d["a_sum"]), None)


def build_model(family: SequenceFamily, n: int) -> CouponModel:
    """Normalize the first n weights of ``family``: p_j = a_j / A_N."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    if family.kind is Kind.EXPLICIT and n > len(family.values):
        raise InvalidParameter(
            f"explicit list has {len(family.values)} weights, fewer than n = {n}"
        )
    a = family.terms(int(n))
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise InvalidParameter(f"weights of {family.label()} over/underflow at n = {n}")
    a_sum = math.fsum(a)
    if not math.isfinite(a_sum):
        raise InvalidParameter(f"A_N overflows for {family.label()} at n = {n}")
    return CouponModel(int(n), a / a_sum, a_sum, family)


# ---------------------------------------------------------------------------
# dichotomy


class Case(str, enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"


@dataclass(frozen=True)
class CaseLabel:
    value: Case
    justification: str
    advisory: str | None = None


def _tail_evidence(values: tuple[float, ...]) -> tuple[Case | None, str]:
    a = np.asarray(values)
    k = max(1, len(a) // 4)
    head, tail = a[:k], a[-k:]
    xi_grid = (0.1, 0.5, 0.9, 0.99)
    sums = {xi: float(np.sum(xi**a)) for xi in xi_grid}
    last = {xi: float(xi ** tail.min()) for xi in xi_grid}
    report = ", ".join(
        f"xi={xi}: partial sum {sums[xi]:.4g}, last-quarter max term {last[xi]:.3g}" for xi in xi_grid
    )
    nondecreasing = bool(np.all(np.diff(tail) >= 0))
    nonincreasing = bool(np.all(np.diff(tail) <= 0))
    if nondecreasing and len(a) >= 8 and last[0.5] < 1e-12:
        return Case.CASE_I, report
    if nonincreasing and len(a) >= 8 and tail.max() <= head.min():
        return Case.CASE_II, report
    return None, report


def classify(family: SequenceFamily) -> CaseLabel:
    """Place ``family`` in Case I (L_r finite) or Case II (L_r infinite)."""
    k = family.kind
    if k is Kind.POWER:
        return CaseLabel(Case.CASE_I, f"a_j = j^{family.p:g} -> inf: sum xi^(j^p) converges for every xi in (0,1)")
    if k is Kind.EXP_GROWTH:
        return CaseLabel(Case.CASE_I, "a_j = e^(pj): sum xi^(e^(pj)) converges for every xi in (0,1)")
    if k is Kind.CONSTANT:
        return CaseLabel(Case.CASE_II, "a_j constant: xi^a_j does not vanish")
    if k is Kind.ZIPF:
        return CaseLabel(Case.CASE_II, "a_j = j^-p -> 0: xi^a_j -> 1, the series diverges")
    if k is Kind.EXP_DECAY:
        return CaseLabel(Case.CASE_II, "a_j = e^(-pj) -> 0: xi^a_j -> 1, the series diverges")
    if k is Kind.LOG_POWER:
        return CaseLabel(Case.CASE_II, "a_j = (ln j)^-p -> 0: xi^a_j -> 1, the series diverges")

    evidence, report = _tail_evidence(family.values)
    if family.tail is not None:
        case = Case.CASE_I if family.tail == "grows" else Case.CASE_II
        note = report
        if evidence is not None and evidence is not case:
            note = f"numeric evidence points to {evidence.value}; " + report
        return CaseLabel(case, f"declared tail hint {family.tail!r}", note)
    if evidence is None:
        raise UnclassifiedError(
            "explicit sequence without a tail hint and with ambiguous numeric evidence; "
            "pass tail='grows' or 'decays-...' (" + report + ")"
        )
    return CaseLabel(evidence, "numeric evidence only (no tail hint declared)", report)


# ---------------------------------------------------------------------------
# smooth interpolant f with 1/a_j = f(j)


def f_derivatives(family: SequenceFamily, x: float) -> tuple[float, float, float]:
    """(f, f', f'') of the interpolant f with a_j = 1 / f(j)."""
    k, p = family.kind, family.p
    if k is Kind.CONSTANT:
        return 1.0, 0.0, 0.0
    if k is Kind.ZIPF:
        if x < 1:
            raise InvalidParameter("f is evaluated for x >= 1")
        return x**p, p * x ** (p - 1), p * (p - 1) * x ** (p - 2)
    if k is Kind.LOG_POWER:
        if not x > 1:
            raise InvalidParameter("logpower interpolant needs x > 1")
        L = math.log(x)
        return L**p, p * L ** (p - 1) / x, p * L ** (p - 2) * ((p - 1) - L) / (x * x)
    if k is Kind.EXP_DECAY:
        e = math.exp(p * x)
        return e, p * e, p * p * e
    raise UnsupportedOperation(f"no smooth decaying interpolant f for {family.label()}")


# ---------------------------------------------------------------------------
# A_N


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    abs_error: float
    method: str
    detail: str = ""

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValueError("abs_error must be nonnegative")

    def to_dict(self) -> dict:
        return {"value": self.value, "abs_error": self.abs_error, "method": self.method, "detail": self.detail}


def a_sum_exact(family: SequenceFamily, n: int) -> float:
    return math.fsum(family.terms(n))


def a_sum_asymptotic(family: SequenceFamily, n: int) -> MomentEstimate:
    """Closed-form approximation of A_N, with the exact sum for comparison.

    ``abs_error`` is the observed gap to the compensated direct sum.
    """
    exact = a_sum_exact(family, n)
    k, p = family.kind, family.p
    if k is Kind.CONSTANT:
        approx, form = float(n), "N"
    elif k is Kind.POWER:
        approx, form = n ** (p + 1) / (p + 1), "N^(p+1)/(p+1)"
    elif k is Kind.ZIPF:
        if p == 1:
            approx, form = math.log(n) + EULER_GAMMA, "ln N + gamma"
        elif p < 1:
            approx, form = n ** (1 - p) / (1 - p) + zeta(p), "N^(1-p)/(1-p) + zeta(p)"
        else:
            approx, form = zeta(p) - 1 / ((p - 1) * n ** (p - 1)), "zeta(p) - 1/((p-1) N^(p-1))"
    elif k is Kind.EXP_GROWTH:
        approx, form = math.expm1(p * n) * math.exp(p) / math.expm1(p), "(e^(p(N+1)) - e^p)/(e^p - 1)"
    elif k is Kind.EXP_DECAY:
        approx, form = -math.expm1(-p * n) * math.exp(-p) / -math.expm1(-p), "e^-p (1 - e^(-pN))/(1 - e^-p)"
    else:
        return MomentEstimate(exact, 0.0, "oracle", "no asymptotic form; exact compensated sum")
    return MomentEstimate(approx, abs(approx - exact), "asymptotic", f"{form}; exact={exact!r}")
