"""Monte-Carlo sampling of T_m(N), an exact small-N oracle, and KS distances.

Reproducibility contract: the seed fixes a Philox key, and sample number i
reads the counter range starting at i * 2^128, so samples use disjoint
substreams.  Shards only decide which worker computes which sample
(i -> shard i mod shards), so the sample multiset does not depend on the
shard count or on thread scheduling.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .errors import BudgetExceeded, InvalidParameter, NotSorted, StateSpaceTooLarge
from .seqmodel import CouponModel

DEFAULT_DRAW_BUDGET = 20_000_000_000
MAX_ORACLE_STATES = 1_000_000


# ---------------------------------------------------------------------------
# alias tables


@dataclass(frozen=True)
class AliasTable:
    prob: np.ndarray
    alias: np.ndarray

    @classmethod
    def build(cls, probs) -> "AliasTable":
        """Vose's construction; O(N)."""
        probs = np.asarray(probs, dtype=float)
        n = len(probs)
        scaled = probs * n / probs.sum()
        prob = np.ones(n)
        alias = np.arange(n, dtype=np.int64)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)
        # leftovers are 1 up to round-off
        return cls(prob, alias)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(0, len(self.prob), size=size)
        coin = rng.random(size)
        return np.where(coin < self.prob[idx], idx, self.alias[idx])


@numba.njit(cache=True, nogil=True)
def _scan(raw, prob, alias, counts, m, remaining):
    """Feed draws until every type has m copies.

    Each draw uses two raw 64-bit words: one picks the alias column, the
    other is the acceptance coin.  Returns (position of the completing draw
    or -1, remaining incomplete types).
    """
    n = prob.shape[0]
    scale = 1.0 / 9007199254740992.0  # 2^-53
    for i in range(raw.shape[0] // 2):
        k = int((raw[2 * i] >> np.uint64(11)) * scale * n)
        if (raw[2 * i + 1] >> np.uint64(11)) * scale >= prob[k]:
            k = alias[k]
        counts[k] += 1
        if counts[k] == m:
            remaining -= 1
            if remaining == 0:
                return i, 0
    return -1, remaining


def _key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed & (2**64 - 1)).generate_state(2, np.uint64)


def _stream(key: np.ndarray, i: int, bitgen: np.random.Philox | None = None) -> np.random.Philox:
    """numpy Philox with ``key`` positioned at the start of substream i (reuses ``bitgen``).

    Reference for the compiled generator below, which yields the same words.
    """
    if bitgen is None:
        bitgen = np.random.Philox(key=key)
    state = bitgen.state
    state["state"]["key"][:] = key
    state["state"]["counter"][:] = (0, 0, i & (2**64 - 1), i >> 64)
    state["buffer_pos"] = 4
    state["has_uint32"] = 0
    bitgen.state = state
    return bitgen


_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
_PHILOX_M1 = np.uint64(0xCA5A826395121157)
_PHILOX_W0 = np.uint64(0x9E3779B97F4A7C15)
_PHILOX_W1 = np.uint64(0xBB67AE8584CAA73B)


@numba.njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo, a_hi = a & _M32, a >> _S32
    b_lo, b_hi = b & _M32, b >> _S32
    t = a_lo * b_lo
    u = a_hi * b_lo + (t >> _S32)
    w = a_lo * b_hi + (u & _M32)
    return a_hi * b_hi + (u >> _S32) + (w >> _S32), a * b


@numba.njit(cache=True)
def _philox_block(ctr, key, out):
    """Increment the 256-bit counter, then write Philox4x64-10(ctr, key) to out.

    Matches numpy's Philox, which bumps the counter before each block.
    """
    ctr[0] += np.uint64(1)
    if ctr[0] == 0:
        ctr[1] += np.uint64(1)
        if ctr[1] == 0:
            ctr[2] += np.uint64(1)
            if ctr[2] == 0:
                ctr[3] += np.uint64(1)
    x0, x1, x2, x3 = ctr[0], ctr[1], ctr[2], ctr[3]
    k0, k1 = key[0], key[1]
    for r in range(10):
        if r > 0:
            k0 += _PHILOX_W0
            k1 += _PHILOX_W1
        hi0, lo0 = _mulhilo(_PHILOX_M0, x0)
        hi1, lo1 = _mulhilo(_PHILOX_M1, x2)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    out[0], out[1], out[2], out[3] = x0, x1, x2, x3


@numba.njit(cache=True, nogil=True)
def _philox_words(key, i, count):
    """First ``count`` words of substream i (test hook)."""
    ctr = np.zeros(4, dtype=np.uint64)
    ctr[2] = np.uint64(i)
    buf = np.empty(4, dtype=np.uint64)
    out = np.empty(count, dtype=np.uint64)
    for j in range(count):
        if j % 4 == 0:
            _philox_block(ctr, key, buf)
        out[j] = buf[j % 4]
    return out


@numba.njit(cache=True, nogil=True)
def _run_indices(key, indices, prob, alias, m, out):
    """out[s] = T_m(N) drawn from substream indices[s].

    Same draw rule as ``_scan``: words 2k and 2k+1 of the substream are the
    column and the coin of draw k.
    """
    n = prob.shape[0]
    scale = 1.0 / 9007199254740992.0  # 2^-53
    sh = np.uint64(11)
    counts = np.zeros(n, dtype=np.int64)
    ctr = np.zeros(4, dtype=np.uint64)
    buf = np.empty(4, dtype=np.uint64)
    for s in range(indices.shape[0]):
        counts[:] = 0
        ctr[:] = 0
        ctr[2] = np.uint64(indices[s])
        remaining = n
        draws = 0
        while remaining > 0:
            _philox_block(ctr, key, buf)
            for h in range(2):
                k = int((buf[2 * h] >> sh) * scale * n)
                if (buf[2 * h + 1] >> sh) * scale >= prob[k]:
                    k = alias[k]
                draws += 1
                counts[k] += 1
                if counts[k] == m:
                    remaining -= 1
                    if remaining == 0:
                        break
        out[s] = draws


def predicted_draws(model: CouponModel, m: int) -> float:
    """Rough size of E[T_m(N)] used for chunking and budget checks.

    Uses the leading behaviour (ln N + (m-1) ln ln N) / p_min, which is exact
    to leading order for equal and Zipf-type probabilities and an
    overestimate for growing sequences.
    """
    L = math.log(model.n) if model.n > 1 else 0.0
    return (L + (m - 1) * math.log1p(L) + m) / model.p_min


def sample_t(model: CouponModel, m: int, rng, table: AliasTable | None = None,
             chunk: int | None = None) -> int:
    """One exact draw of T_m(N): buy coupons until every type has m copies.

    ``rng`` is a numpy Generator or BitGenerator; only its raw 64-bit
    output is used.
    """
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    bitgen = getattr(rng, "bit_generator", rng)
    table = table or AliasTable.build(model.probs)
    chunk = chunk or _chunk(model, m)
    counts = np.zeros(model.n, dtype=np.int64)
    remaining = model.n
    used = 0
    while True:
        raw = bitgen.random_raw(2 * chunk)
        pos, remaining = _scan(raw, table.prob, table.alias, counts, m, remaining)
        if pos >= 0:
            return used + pos + 1
        used += chunk


def _chunk(model, m):
    return max(16, int(1.25 * predicted_draws(model, m)))


# ---------------------------------------------------------------------------
# Monte-Carlo runs


@dataclass(frozen=True)
class EmpiricalDistribution:
    count: int
    mean: float
    variance: float
    sorted_samples: np.ndarray = field(repr=False)
    seed: int
    shards: int

    def to_dict(self, include_samples: bool = False) -> dict:
        d = {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "seed": self.seed,
            "shards": self.shards,
        }
        if include_samples:
            d["sorted_samples"] = self.sorted_samples.tolist()
        return d

    def to_json(self, include_samples: bool = False) -> str:
        return json.dumps(self.to_dict(include_samples))

    def dump_raw(self, path) -> None:
        """One sample per line."""
        with open(path, "w") as fh:
            for v in self.sorted_samples:
                fh.write(f"{int(v)}\n")


def _shard_worker(m, table, key, indices):
    values = np.empty(indices.shape[0], dtype=np.int64)
    _run_indices(key, indices, table.prob, table.alias, m, values)
    return indices, values


def run_mc(model: CouponModel, m: int, samples: int, seed: int, shards: int | None = None,
           budget: float = DEFAULT_DRAW_BUDGET) -> EmpiricalDistribution:
    """Draw ``samples`` independent copies of T_m(N)."""
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    shards = shards or os.cpu_count() or 1
    if shards < 1:
        raise InvalidParameter("shards must be >= 1")
    expected = predicted_draws(model, m)
    if samples * expected > budget:
        raise BudgetExceeded(
            f"about {samples * expected:.3g} coupon draws predicted; budget is {budget:.3g}"
        )
    table = AliasTable.build(model.probs)
    key = _key(seed)
    out = np.empty(samples, dtype=np.int64)
    jobs = [np.arange(s, samples, shards, dtype=np.int64) for s in range(shards)]
    if shards == 1:
        results = [_shard_worker(m, table, key, jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            results = list(pool.map(lambda ix: _shard_worker(m, table, key, ix), jobs))
    for indices, values in results:
        out[indices] = values
    data = np.sort(out)
    # integer sums are exact; convert once at the end
    total = int(data.sum())
    mean = total / samples
    dev = data - mean
    var = math.fsum(dev * dev) / (samples - 1) if samples > 1 else 0.0
    return EmpiricalDistribution(samples, mean, var, data.astype(float), int(seed), shards)


# ---------------------------------------------------------------------------
# exact oracle


@dataclass(frozen=True)
class ExactMoments:
    expectation: float
    second_rising: float
    variance: float
    pgf_at: Callable[[float], float] = field(repr=False)


def exact_small(model: CouponModel, m: int) -> ExactMoments:
    """Moments of T_m(N) from the absorbing chain on capped counts.

    States are vectors c with 0 <= c_j <= m.  From c, a draw of a completed
    type changes nothing (probability s); otherwise the chain moves to c + e_j.
    The waiting time G for a useful draw is geometric with success q = 1 - s,
    so with tau = G + tau' the moments follow by backward recursion over the
    total count.  ``pgf_at(z)`` returns E[z^{-T}].
    """
    n = model.n
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    size = (m + 1) ** n
    if size > MAX_ORACLE_STATES:
        raise StateSpaceTooLarge(f"(m+1)^N = {size} states exceeds {MAX_ORACLE_STATES}")
    p = model.probs
    radix = (m + 1) ** np.arange(n)
    codes = np.arange(size)
    digits = (codes[:, None] // radix[None, :]) % (m + 1)
    level = digits.sum(axis=1)
    order = np.argsort(-level, kind="stable")
    open_ = digits < m
    s = np.where(open_, 0.0, p[None, :]).sum(axis=1)
    q = 1.0 - s

    def recurse(kernel):
        out = [None] * size
        for c in order:
            if level[c] == n * m:
                out[c] = kernel(None, None, None)
                continue
            nxt = [(p[j], out[c + radix[j]]) for j in range(n) if open_[c, j]]
            out[c] = kernel(q[c], s[c], nxt)
        return out[0]

    def moments_kernel(qc, sc, nxt):
        if qc is None:
            return (0.0, 0.0)
        e_next = math.fsum(pj * v[0] for pj, v in nxt) / qc
        e2_next = math.fsum(pj * v[1] for pj, v in nxt) / qc
        eg = 1.0 / qc
        eg2 = (2.0 - qc) / (qc * qc)
        return (eg + e_next, eg2 + 2.0 * eg * e_next + e2_next)

    e1, e2 = recurse(moments_kernel)

    def pgf_at(z: float) -> float:
        x = 1.0 / z

        def kernel(qc, sc, nxt):
            if qc is None:
                return 1.0
            g = qc * x / (1.0 - sc * x)
            return g * math.fsum(pj * v for pj, v in nxt) / qc

        return recurse(kernel)

    return ExactMoments(e1, e2 + e1, e2 - e1 * e1, pgf_at)


# ---------------------------------------------------------------------------
# goodness of fit


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n: int
    reference: str


def ks_statistic(samples, cdf, reference: str = "") -> KsResult:
    """sup |F_n - F| evaluated on both sides of each sample point."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidParameter("samples must be a nonempty 1-D sequence")
    if np.any(np.diff(x) < 0):
        raise NotSorted("samples must be sorted in nondecreasing order")
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F)))
    return KsResult(float(d), n, reference)


def normalized_samples(dist: EmpiricalDistribution, norm) -> np.ndarray:
    """Sorted (t_i - b_n) / k_n."""
    if not norm.k_n > 0:
        raise InvalidParameter("k_n must be positive")
    return np.sort((dist.sorted_samples - norm.b_n) / norm.k_n)
