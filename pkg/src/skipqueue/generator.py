"""Truncated intensity matrices of the queue-skipping chain.

States 0..M are retained. An arrival of a batch of size j > i moves the
chain from i to j; batches larger than M are lumped into state M, so rows
0..M-1 of the truncated Q(t) stay conservative and only row M leaks the
mass lambda(t) * B_{M+1} that would escape past the truncation.

Q(t) is linear in the rates: Q(t) = lambda(t) * Q_arr + mu(t) * Q_srv,
which is how the ODE solver uses it.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .batch import BatchDistribution
from .intensity import IntensityFunction

BAND_CUTOFF = 1e-16


@dataclass(frozen=True)
class WeightSequence:
    """d_1 = 1, d_{k+1} = delta^(-k)."""

    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")

    def d(self, k):
        k = np.asarray(k, dtype=float)
        if np.any(k < 1):
            raise ValueError("weights are indexed from 1")
        out = np.power(self.delta, -(k - 1.0))
        return float(out) if out.ndim == 0 else out

    def array(self, n: int) -> np.ndarray:
        return self.d(np.arange(1, n + 1))


class TruncatedGenerator:
    """Q(t), A(t) = Q(t)^T and the reduced matrices on states 0..level."""

    def __init__(self, level: int, lam: IntensityFunction, mu: IntensityFunction,
                 batch: BatchDistribution):
        if level < 1:
            raise ValueError("truncation level must be at least 1")
        self.level = int(level)
        self.lam = lam
        self.mu = mu
        self.batch = batch

    def __repr__(self):
        return f"TruncatedGenerator(level={self.level}, lam={self.lam!r}, mu={self.mu!r}, batch={self.batch!r})"

    @functools.cached_property
    def _b(self):
        # b_0 := 0 so that _b[j] = b_j for j = 0..M+1
        return np.concatenate([[0.0], self.batch.pmf_array(self.level + 1)])

    @functools.cached_property
    def _B(self):
        # _B[k] = B_k for k = 1..M+2, _B[0] unused
        return np.concatenate([[np.nan], self.batch.tail_array(self.level + 2)])

    @functools.cached_property
    def _q_parts(self):
        """Dense (Q_arr, Q_srv) with Q(t) = lambda Q_arr + mu Q_srv."""
        M = self.level
        qa = np.zeros((M + 1, M + 1))
        qs = np.zeros((M + 1, M + 1))
        b, B = self._b, self._B
        for i in range(M + 1):
            qa[i, i + 1:M] = b[i + 1:M]
            if i < M:
                qa[i, M] = B[M]
            qa[i, i] = -B[i + 1]
            if i > 0:
                qs[i, i - 1] = 1.0
                qs[i, i] = -1.0
        return qa, qs

    @functools.cached_property
    def sparse_parts(self):
        """CSR (A_arr, A_srv) for A(t) = lambda A_arr + mu A_srv.

        Upper batch entries with b_j < 1e-16 are dropped; the dropped mass
        shows up as extra leakage that the solver books into its budget.
        """
        qa, qs = self._q_parts
        qa = qa.copy()
        M = self.level
        small = np.flatnonzero(self._b[1:M] < BAND_CUTOFF) + 1
        if small.size:
            cols = np.zeros(M + 1, dtype=bool)
            cols[small] = True
            upper = np.triu(np.ones_like(qa, dtype=bool), 1)
            qa[upper & cols[None, :]] = 0.0
        return sparse.csr_matrix(qa.T), sparse.csr_matrix(qs.T)

    def _rates(self, t):
        return self.lam(t), self.mu(t)

    def _check_state(self, *states):
        for s in states:
            if not 0 <= s <= self.level:
                raise ValueError(f"state {s} outside 0..{self.level}")

    def q_entry(self, i: int, j: int, t: float) -> float:
        self._check_state(i, j)
        lam, mu = self._rates(t)
        qa, qs = self._q_parts
        return float(lam * qa[i, j] + mu * qs[i, j])

    def build_Q(self, t: float) -> np.ndarray:
        lam, mu = self._rates(t)
        qa, qs = self._q_parts
        return lam * qa + mu * qs

    def build_A(self, t: float) -> np.ndarray:
        return self.build_Q(t).T

    def residual(self, t: float) -> float:
        """Rate lambda(t) B_{M+1} at which mass leaves the truncated space from state M."""
        return float(self.lam(t) * self._B[self.level + 1])

    def build_B_reduced(self, t: float):
        """(B(t), f(t)) with b_ij = a_ij - a_i0 on states 1..M and f_i = a_i0."""
        A = self.build_A(t)
        f = A[1:, 0].copy()
        return A[1:, 1:] - f[:, None], f

    def build_B_star(self, t: float, displayed: bool = False) -> np.ndarray:
        """Closed form of T B(t) T^{-1}.

        The exact conjugate is upper bidiagonal: diagonal -(mu + lambda B_i),
        superdiagonal mu. Truncation adds -lambda B_{M+1} to every entry of
        the last column, the leak out of state M. With ``displayed=True``
        the printed infinite-state variant is returned instead, which also
        carries lambda b_{j-2} in every entry (i, j) with j >= i + 2 and no
        leak term. That variant is not the conjugate; it is kept because the
        published column rates are its column sums.
        """
        lam, mu = self._rates(t)
        M = self.level
        B = self._B
        out = np.zeros((M, M))
        idx = np.arange(M)
        out[idx, idx] = -(mu + lam * B[1:M + 1])
        out[idx[:-1], idx[:-1] + 1] = mu
        if displayed:
            b = self._b
            for i in range(M):
                for j in range(i + 2, M):
                    # 0-based j -> 1-based j+1, so b_{(j+1)-2} = b[j-1]
                    out[i, j] = lam * b[j - 1]
        else:
            out[:, M - 1] -= lam * B[M + 1]
        return out

    def build_B_star_star(self, w: WeightSequence, t: float, displayed: bool = False) -> np.ndarray:
        d = w.array(self.level)
        return d[:, None] * self.build_B_star(t, displayed=displayed) / d[None, :]


def explicit_T(n: int) -> np.ndarray:
    return np.triu(np.ones((n, n)))


def explicit_T_inv(n: int) -> np.ndarray:
    return np.eye(n) - np.eye(n, k=1)


def log_norm(m) -> float:
    """l1 logarithmic norm: max over columns of (diagonal + sum |off-diagonal|)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("log_norm needs a square matrix")
    off = np.abs(m).sum(axis=0) - np.abs(np.diag(m))
    return float(np.max(np.diag(m) + off))


def alpha_i(g: TruncatedGenerator, w: WeightSequence, i: int, t: float) -> float:
    """Published closed form of the i-th column rate.

    alpha_1 = lambda + mu; alpha_2 = lambda B_2 + mu (1 - delta);
    alpha_k = lambda (B_k - b_{k-2}(delta^2 + ... + delta^(k-1))) + mu (1 - delta).
    Equals minus the i-th column sum of the displayed B**(t).
    """
    lam, mu = g.lam(t), g.mu(t)
    return lam * alpha_lambda_coefficient(g.batch, w.delta, i) + mu * (1.0 if i == 1 else 1.0 - w.delta)


def alpha_i_exact(g: TruncatedGenerator, w: WeightSequence, i: int, t: float) -> float:
    """Column rate of the exact conjugate: lambda B_i + mu (1 - delta), and lambda + mu for i = 1."""
    if i < 1:
        raise ValueError("column index starts at 1")
    lam, mu = g.lam(t), g.mu(t)
    if i == 1:
        return lam + mu
    return lam * g.batch.tail(i) + mu * (1.0 - w.delta)


def alpha_lambda_coefficient(batch: BatchDistribution, delta: float, k) -> float:
    """lambda-coefficient of the published alpha_k: B_k - b_{k-2}(delta^2 + ... + delta^(k-1))."""
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("column index starts at 1")
    kk = np.maximum(k, 3)
    geo = delta**2 * (1.0 - delta ** (kk - 2.0)) / (1.0 - delta)
    coef = batch.tail(kk) - batch.pmf(kk - 2) * geo
    coef = np.where(k == 2, batch.tail(np.maximum(k, 1)), coef)
    coef = np.where(k == 1, 1.0, coef)
    return float(coef) if coef.ndim == 0 else coef
