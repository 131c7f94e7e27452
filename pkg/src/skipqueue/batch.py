"""Batch-size laws {b_k, k >= 1}, their tails B_k and tail classification."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special


@dataclass(frozen=True)
class TailClass:
    kind: str  # "finite", "geometric" or "heavy"
    C: Optional[float] = None
    q: Optional[float] = None

    @classmethod
    def finite(cls):
        return cls("finite")

    @classmethod
    def geometric(cls, C, q):
        return cls("geometric", float(C), float(q))

    @classmethod
    def heavy(cls):
        return cls("heavy")


class BatchDistribution:
    """Common interface. ``pmf``/``tail`` accept ints or integer arrays."""

    support_max: float = math.inf

    def pmf(self, k):
        raise NotImplementedError

    def tail(self, k):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def tail_class(self) -> TailClass:
        raise NotImplementedError

    def pmf_array(self, n: int) -> np.ndarray:
        """b_1..b_n as an array of length n."""
        return np.asarray(self.pmf(np.arange(1, n + 1)), dtype=float)

    def tail_array(self, n: int) -> np.ndarray:
        """B_1..B_n as an array of length n."""
        return np.asarray(self.tail(np.arange(1, n + 1)), dtype=float)

    def effective_support(self, cutoff: float = 1e-16) -> int:
        """Smallest k with B_{k+1} < cutoff (the support maximum if finite)."""
        if math.isfinite(self.support_max):
            return int(self.support_max)
        k = 1
        while self.tail(k + 1) >= cutoff:
            k *= 2
        lo, hi = k // 2, k
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if self.tail(mid + 1) >= cutoff:
                lo = mid
            else:
                hi = mid
        return hi

    def sample(self, u):
        """Inverse-transform sample from uniforms ``u`` in [0, 1)."""
        raise NotImplementedError


def _check_index(k):
    if np.any(np.asarray(k) < 1):
        raise ValueError("batch sizes start at 1")


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Geometric(BatchDistribution):
    """b_k = (1-q) q^(k-1)."""

    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("geometric parameter q must lie in (0, 1)")

    def pmf(self, k):
        _check_index(k)
        return _scalar((1.0 - self.q) * np.power(self.q, np.asarray(k) - 1.0))

    def tail(self, k):
        _check_index(k)
        return _scalar(np.power(self.q, np.asarray(k) - 1.0))

    def mean(self):
        return 1.0 / (1.0 - self.q)

    def tail_class(self):
        # b_k = ((1-q)/q) q^k; C = 1 suffices once q >= 1/2
        return TailClass.geometric(max(1.0, (1.0 - self.q) / self.q), self.q)

    def sample(self, u):
        u = np.asarray(u, dtype=float)
        k = np.ceil(np.log1p(-u) / math.log(self.q))
        return np.maximum(k, 1).astype(np.int64)


@dataclass(frozen=True)
class FiniteSupport(BatchDistribution):
    probs: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "probs", p)
        if not p or min(p) < 0:
            raise ValueError("finite batch law needs nonnegative probabilities")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValueError(f"batch probabilities sum to {math.fsum(p)}, not 1")
        if p[-1] == 0.0:
            raise ValueError("trailing zero probabilities are not allowed")

    @property
    def support_max(self):
        return len(self.probs)

    def _padded(self, k):
        k = np.asarray(k)
        p = np.concatenate([[0.0], self.probs, [0.0]])
        return p[np.clip(k, 0, len(self.probs) + 1)]

    def _tails(self):
        # B_k for k = 1..b*+1, summed from the top
        return np.concatenate([np.cumsum(self.probs[::-1])[::-1], [0.0]])

    def pmf(self, k):
        _check_index(k)
        return _scalar(self._padded(k))

    def tail(self, k):
        _check_index(k)
        k = np.asarray(k)
        tails = self._tails()
        return _scalar(tails[np.clip(k, 1, len(tails)) - 1])

    def mean(self):
        return math.fsum(k * p for k, p in enumerate(self.probs, start=1))

    def tail_class(self):
        return TailClass.finite()

    def sample(self, u):
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        return np.searchsorted(cdf, np.asarray(u, dtype=float), side="right").astype(np.int64) + 1


@dataclass(frozen=True)
class GeometricTailLaw(BatchDistribution):
    """Explicit prefix b_1..b_m, then a geometric continuation with ratio q.

    The continuation carries the leftover mass r = 1 - sum(prefix):
    b_k = r (1-q) q^(k-m-1) for k > m. The certificate b_k <= C q^k is
    checked on the prefix and on the continuation.
    """

    prefix: tuple
    C: float
    q: float

    def __post_init__(self):
        p = tuple(float(x) for x in self.prefix)
        object.__setattr__(self, "prefix", p)
        if not 0.0 < self.q < 1.0 or self.C <= 0:
            raise ValueError("need C > 0 and 0 < q < 1")
        if min(p, default=0.0) < 0:
            raise ValueError("negative probability in prefix")
        rest = 1.0 - math.fsum(p)
        if rest < -1e-12:
            raise ValueError("prefix mass exceeds 1")
        object.__setattr__(self, "_rest", max(rest, 0.0))
        m = len(p)
        for k, bk in enumerate(p, start=1):
            if bk > self.C * self.q**k * (1 + 1e-12):
                raise ValueError(f"certificate fails at k={k}: b_k={bk} > C q^k")
        # continuation b_k = r(1-q)q^(k-m-1) <= C q^k for all k > m iff r(1-q) <= C q^(m+1)
        if self._rest * (1 - self.q) > self.C * self.q ** (m + 1) * (1 + 1e-12):
            raise ValueError("certificate fails on the geometric continuation")

    def pmf(self, k):
        _check_index(k)
        k = np.asarray(k)
        m = len(self.prefix)
        pre = np.concatenate([[0.0], self.prefix])[np.clip(k, 0, m)]
        cont = self._rest * (1 - self.q) * np.power(self.q, np.maximum(k - m - 1, 0).astype(float))
        return _scalar(np.where(k <= m, pre, cont))

    def tail(self, k):
        _check_index(k)
        k = np.asarray(k)
        m = len(self.prefix)
        # B_k for k <= m+1: rest + sum_{n=k}^{m} b_n
        pre_tails = np.concatenate([np.cumsum(self.prefix[::-1])[::-1], [0.0]]) + self._rest
        head = pre_tails[np.clip(k, 1, m + 1) - 1]
        cont = self._rest * np.power(self.q, np.maximum(k - m - 1, 0).astype(float))
        return _scalar(np.where(k <= m + 1, head, cont))

    def mean(self):
        m = len(self.prefix)
        return (math.fsum(k * p for k, p in enumerate(self.prefix, start=1))
                + self._rest * (m + 1.0 / (1.0 - self.q)))

    def tail_class(self):
        return TailClass.geometric(self.C, self.q)

    def sample(self, u):
        u = np.asarray(u, dtype=float)
        m = len(self.prefix)
        cdf = np.cumsum(self.prefix)
        k = np.searchsorted(cdf, u, side="right") + 1
        in_tail = k > m
        if np.any(in_tail):
            v = (u[in_tail] - (1 - self._rest)) / self._rest if self._rest > 0 else 0.0
            v = np.clip(v, 0.0, np.nextafter(1.0, 0.0))
            k = k.astype(np.int64)
            k[in_tail] = m + np.maximum(np.ceil(np.log1p(-v) / math.log(self.q)), 1).astype(np.int64)
        return np.asarray(k, dtype=np.int64)


_POWER_TABLE = 1 << 20


@functools.lru_cache(maxsize=8)
def _power_cdf(s):
    k = np.arange(1, _POWER_TABLE + 1, dtype=float)
    return np.cumsum(np.power(k, -s) / special.zeta(s))


@dataclass(frozen=True)
class PowerLaw(BatchDistribution):
    """b_k = k^(-s) / zeta(s), s > 1. Heavier than any geometric tail."""

    s: float

    def __post_init__(self):
        if self.s <= 1:
            raise ValueError("power-law exponent must exceed 1")

    def pmf(self, k):
        _check_index(k)
        return _scalar(np.power(np.asarray(k, dtype=float), -self.s) / special.zeta(self.s))

    def tail(self, k):
        _check_index(k)
        return _scalar(special.zeta(self.s, np.asarray(k, dtype=float)) / special.zeta(self.s))

    def mean(self):
        if self.s <= 2:
            raise ValueError(f"mean batch size diverges for power law with s={self.s}")
        return special.zeta(self.s - 1) / special.zeta(self.s)

    def tail_class(self):
        return TailClass.heavy()

    def sample(self, u):
        # inverse transform: tabulated CDF up to a cutoff, continuous tail beyond
        u = np.asarray(u, dtype=float)
        kmax = _POWER_TABLE
        cdf = _power_cdf(self.s)
        k = np.searchsorted(cdf, u, side="right") + 1
        far = k > kmax
        if np.any(far):
            # B_k ~ k^(1-s) / ((s-1) zeta(s))
            mass = (1 - u[far]) * (self.s - 1) * special.zeta(self.s)
            k = k.astype(np.int64)
            k[far] = np.maximum(np.floor(mass ** (-1.0 / (self.s - 1))), kmax + 1).astype(np.int64)
        return np.asarray(k, dtype=np.int64)


def mean_batch(d: BatchDistribution) -> float:
    return d.mean()


def from_config(spec: dict) -> BatchDistribution:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    allowed = {"geometric": {"q"}, "finite": {"pmf"}, "geom_tail": {"prefix", "C", "q"},
               "power": {"s"}}
    if kind not in allowed:
        raise ValueError(f"unknown batch kind {kind!r}")
    extra = set(spec) - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for {kind} batch: {sorted(extra)}")
    if kind == "geometric":
        return Geometric(spec["q"])
    if kind == "finite":
        return FiniteSupport(tuple(spec["pmf"]))
    if kind == "geom_tail":
        return GeometricTailLaw(tuple(spec["prefix"]), spec["C"], spec["q"])
    return PowerLaw(spec["s"])


def to_config(d: BatchDistribution) -> dict:
    if isinstance(d, Geometric):
        return {"kind": "geometric", "q": d.q}
    if isinstance(d, FiniteSupport):
        return {"kind": "finite", "pmf": list(d.probs)}
    if isinstance(d, GeometricTailLaw):
        return {"kind": "geom_tail", "prefix": list(d.prefix), "C": d.C, "q": d.q}
    if isinstance(d, PowerLaw):
        return {"kind": "power", "s": d.s}
    raise TypeError(type(d))
