"""Limit laws of the normalized completion time.

Growing sequences: T_m(N)/A_N converges to F(s) = prod_j [1 - Q(m, a_j s)].
Decaying sequences: (T_m(N) - b_N)/k_N converges to a Gumbel-type law whose
centering and scale come from the moment asymptotics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DichotomyError, InvalidParameter, UnsupportedOperation
from .moments import tail_sum_bound
from .seqmodel import Case, CouponModel, Kind, SequenceFamily, a_sum_exact, classify
from .special import erlang_survival, log_erlang_cdf


class LawKind(str, enum.Enum):
    GUMBEL = "gumbel"
    SLOW_DECAY_GUMBEL = "slow-decay-gumbel"
    CASE_I_FIXED_POINT = "case1-fixed-point"


@dataclass(frozen=True)
class Law:
    kind: LawKind
    m: int
    p: float | None = None

    @classmethod
    def gumbel(cls, m):
        return cls(LawKind.GUMBEL, m)

    @classmethod
    def slow_decay(cls, m, p):
        return cls(LawKind.SLOW_DECAY_GUMBEL, m, float(p))


@dataclass(frozen=True)
class Normalization:
    b_n: float
    k_n: float
    law: Law

    def __post_init__(self):
        if not self.k_n > 0:
            raise InvalidParameter("scale k_n must be positive")

    def to_dict(self) -> dict:
        d = {"b": self.b_n, "k": self.k_n, "law": self.law.kind.value, "m": self.law.m}
        if self.law.p is not None:
            d["p"] = self.law.p
        return d


def limit_cdf(law: Law, y):
    """Distribution function of the limit law; vectorized over y."""
    y_arr = np.asarray(y, dtype=float)
    lf = math.lgamma(law.m)
    if law.kind is LawKind.GUMBEL:
        expo = -y_arr - lf
    elif law.kind is LawKind.SLOW_DECAY_GUMBEL:
        expo = -(y_arr - law.p) - math.log1p(law.p) - lf
    else:
        raise UnsupportedOperation("the Case I law depends on the sequence; use case1_limit_cdf")
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(expo))
    return float(out) if np.ndim(y) == 0 else out


def gumbel_normalization(family: SequenceFamily, m: int, n: int) -> Normalization:
    """Centering b_N and scale k_N for decaying sequences."""
    if m < 1 or n < 3:
        raise InvalidParameter("need m >= 1 and n >= 3")
    if classify(family).value is Case.CASE_I:
        raise UnsupportedOperation("growing sequence: T/A_N has the Case I limit, use case1_limit_cdf")
    k = family.kind
    L = math.log(n)
    if k is Kind.ZIPF:
        p = family.p
        k_n = a_sum_exact(family, n) * n**p
        b_n = k_n * (L + (m - 2) * math.log(L) - math.log(p))
        return Normalization(b_n, k_n, Law.gumbel(m))
    b_n = n * L + (m - 1) * n * math.log(L)
    if k is Kind.CONSTANT:
        return Normalization(b_n, float(n), Law.gumbel(m))
    if k is Kind.LOG_POWER:
        return Normalization(b_n, float(n), Law.slow_decay(m, family.p))
    raise UnsupportedOperation(f"no Gumbel normalization known for {family.label()}")


def lambda_functional(model: CouponModel, m: int, b_n: float, k_n: float, y) -> float:
    """(b^{m-1}/(m-1)!) sum_j p_j^{m-1} exp(-p_j (b + y k)), summands in log space."""
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    arg = b_n + y_arr * k_n
    if np.any(arg <= 0):
        raise InvalidParameter("b_n + y k_n must be positive")
    logp = np.log(model.probs)
    out = np.empty_like(y_arr)
    for i, a in enumerate(arg):
        logs = (m - 1) * (math.log(b_n) + logp) - math.lgamma(m) - model.probs * a
        out[i] = math.fsum(np.exp(logs))
    return float(out[0]) if np.ndim(y) == 0 else out


def case1_limit_cdf(family: SequenceFamily, m: int, s, tol: float = 1e-10, max_terms: int = 1 << 22):
    """F(s) = prod_{j>=1} [1 - Q(m, a_j s)] for a growing sequence.

    The product is cut at J terms once sum_{j>J} Q(m, a_j s) <= tol at the
    smallest positive s requested, which bounds the truncation error by tol.
    """
    if classify(family).value is Case.CASE_II:
        raise DichotomyError(family)
    if family.kind is Kind.EXPLICIT:
        raise UnsupportedOperation("explicit lists are finite; the limit law needs the infinite tail")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise InvalidParameter("s must be nonnegative")
    out = np.zeros_like(s_arr)
    pos = s_arr > 0
    if np.any(pos):
        s_min = s_arr[pos].min()
        J = 16
        while float(tail_sum_bound(family, m, J, s_min)) > tol:
            J *= 2
            if J > max_terms:
                raise UnsupportedOperation(f"product needs more than {max_terms} factors at s={s_min:g}")
        a = family.terms(J)
        sp = s_arr[pos]
        logs = np.zeros_like(sp)
        for start in range(0, J, 4096):
            aa = a[start:start + 4096]
            logs += log_erlang_cdf(m, (sp[:, None] * aa[None, :]).ravel()).reshape(len(sp), -1).sum(axis=1)
        out[pos] = np.exp(logs)
    return float(out[0]) if np.ndim(s) == 0 else out


__all__ = [
    "Law",
    "LawKind",
    "Normalization",
    "limit_cdf",
    "gumbel_normalization",
    "lambda_functional",
    "case1_limit_cdf",
    "erlang_survival",
]
