"""Forward Kolmogorov system dp/dt = A(t) p on a truncated state space.

Fixed-step classical RK4. After each step negative entries are clipped and
the vector is renormalised; both corrections are booked into an error
budget that travels with the solution.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import TruncationError
from .generator import TruncatedGenerator

log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
DEFAULT_STRIDE = 1e-2
NEGATIVE_ALARM = -1e-12
GRID_ATOL = 1e-9


@dataclass
class TransientSolution:
    grid: np.ndarray  # (n,)
    states: np.ndarray  # (n, M+1)
    budget: np.ndarray  # (n,), nondecreasing
    initial: Union[int, np.ndarray]
    level: int
    alarms: int = 0

    def index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[i] - t) > GRID_ATOL:
            raise ValueError(f"t={t} is not on the output grid")
        return i

    def at(self, t: float) -> np.ndarray:
        return self.states[self.index(t)]

    def mean(self) -> np.ndarray:
        """E(t) = sum_n n p_n(t) on the whole grid."""
        return self.states @ np.arange(self.level + 1)

    def p0(self) -> np.ndarray:
        return self.states[:, 0]


@dataclass
class LimitCycle:
    grid: np.ndarray
    states: np.ndarray
    error_tag: Optional[float]
    budget: float

    @property
    def p0(self):
        return self.states[:, 0]

    def period_average(self, column: int = 0) -> float:
        """Trapezoid average of p_column over the window."""
        y = self.states[:, column]
        return float(np.trapezoid(y, self.grid) / (self.grid[-1] - self.grid[0]))


def initial_vector(level: int, initial) -> np.ndarray:
    if np.ndim(initial) == 0:
        k = int(initial)
        if not 0 <= k <= level:
            raise ValueError(f"initial state {k} outside 0..{level}")
        p = np.zeros(level + 1)
        p[k] = 1.0
        return p
    p = np.asarray(initial, dtype=float)
    if p.shape != (level + 1,):
        raise ValueError(f"initial vector must have length {level + 1}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("initial vector is not a probability vector")
    return p


def _integrate(g: TruncatedGenerator, P0: np.ndarray, t_end: float, step: float,
               stride: float, budget_cap: float):
    """RK4 on a block of columns. Returns grid, (n_out, M+1, m) states, (n_out, m) budgets."""
    if step <= 0 or t_end <= 0:
        raise ValueError("need step > 0 and t_end > 0")
    n = max(1, math.ceil(t_end / step - 1e-9))
    h = t_end / n
    every = max(1, int(round(stride / h)))
    out_idx = list(range(0, n + 1, every))
    if out_idx[-1] != n:
        out_idx.append(n)
    Aa, As = g.sparse_parts
    if Aa.nnz > 0.2 * Aa.shape[0] ** 2:
        Aa, As = Aa.toarray(), As.toarray()
    tt = np.linspace(0.0, t_end, 2 * n + 1)  # half-step nodes
    lam = np.asarray(g.lam(tt), dtype=float) * np.ones_like(tt)
    mu = np.asarray(g.mu(tt), dtype=float) * np.ones_like(tt)

    def rhs(j, P):
        return lam[j] * (Aa @ P) + mu[j] * (As @ P)

    P = P0.copy()
    m = P.shape[1]
    budget = np.zeros(m)
    alarms = 0
    states = np.empty((len(out_idx), P.shape[0], m))
    budgets = np.empty((len(out_idx), m))
    states[0], budgets[0] = P, budget
    slot = 1
    for s in range(1, n + 1):
        j = 2 * (s - 1)
        k1 = rhs(j, P)
        k2 = rhs(j + 1, P + 0.5 * h * k1)
        k3 = rhs(j + 1, P + 0.5 * h * k2)
        k4 = rhs(j + 2, P + h * k3)
        P = P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        neg = P < 0.0
        if neg.any():
            if P.min() < NEGATIVE_ALARM:
                alarms += 1
                log.warning("negative probability %.3e at t=%.6g", P.min(), s * h)
            clipped = -np.where(neg, P, 0.0).sum(axis=0)
            P = np.where(neg, 0.0, P)
        else:
            clipped = 0.0
        total = P.sum(axis=0)
        budget = budget + clipped + np.abs(1.0 - total)
        P = P / total
        if budget.max() > budget_cap:
            raise TruncationError(
                f"error budget {budget.max():.3e} exceeds cap {budget_cap:.3e} at t={s * h:.4g}: "
                f"truncation level {g.level} too small")
        if slot < len(out_idx) and s == out_idx[slot]:
            states[slot], budgets[slot] = P, budget
            slot += 1
    grid = np.asarray(out_idx, dtype=float) * h
    return grid, states, budgets, alarms


def solve(g: TruncatedGenerator, initial, t_end: float, step: float = DEFAULT_STEP,
          stride: float = DEFAULT_STRIDE, budget_cap: float = 1e-3) -> TransientSolution:
    """Integrate from one initial state (int) or probability vector."""
    p0 = initial_vector(g.level, initial)
    grid, states, budgets, alarms = _integrate(g, p0[:, None], t_end, step, stride, budget_cap)
    return TransientSolution(grid, states[:, :, 0], budgets[:, 0], initial, g.level, alarms)


def solve_many(g: TruncatedGenerator, initials: Sequence, t_end: float, step: float = DEFAULT_STEP,
               stride: float = DEFAULT_STRIDE, budget_cap: float = 1e-3):
    """Several initial conditions integrated together on one grid."""
    P0 = np.stack([initial_vector(g.level, x) for x in initials], axis=1)
    grid, states, budgets, alarms = _integrate(g, P0, t_end, step, stride, budget_cap)
    return [TransientSolution(grid, states[:, :, c], budgets[:, c], x, g.level, alarms)
            for c, x in enumerate(initials)]


def pair_distance(g: TruncatedGenerator, k1: int, k2: int, t_end: float,
                  step: float = DEFAULT_STEP, stride: float = DEFAULT_STRIDE):
    """(grid, ||p^(k1)(t) - p^(k2)(t)||_1, sol1, sol2)."""
    if k1 == k2:
        raise ValueError("initial states must differ")
    s1, s2 = solve_many(g, [k1, k2], t_end, step, stride)
    return s1.grid, np.abs(s1.states - s2.states).sum(axis=1), s1, s2


def _l1_padded(p_small: np.ndarray, p_big: np.ndarray) -> float:
    n = len(p_small)
    return float(np.abs(p_small - p_big[:n]).sum() + np.abs(p_big[n:]).sum())


def choose_truncation(lam, mu, batch, horizon: float, tol: float, cap: int = 100_000,
                      start: int = 50, step: float = 1e-2, initial: int = 0) -> int:
    """Smallest M in start, 2*start, ... passing the tail-mass and doubling tests.

    (a) sup lambda * B_{M+1} * horizon <= tol / 2;
    (b) ||p_M(horizon) - p_2M(horizon)||_1 <= tol / 2 from ``initial``.
    A finite batch support b* needs no truncation and is returned as is.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if math.isfinite(batch.support_max):
        b_star = int(batch.support_max)
        if b_star > cap:
            raise TruncationError(f"support {b_star} exceeds truncation cap {cap}")
        return max(b_star, initial, 1)
    L = lam.sup_bound
    M = start
    while True:
        if M > cap:
            raise TruncationError(f"truncation level would exceed cap {cap}")
        if M >= initial and L * batch.tail(M + 1) * horizon <= tol / 2:
            break
        M *= 2
    while True:
        if 2 * M > cap:
            raise TruncationError(f"doubling check would exceed cap {cap}")
        p_m = solve(TruncatedGenerator(M, lam, mu, batch), initial, horizon, step, horizon).states[-1]
        p_2m = solve(TruncatedGenerator(2 * M, lam, mu, batch), initial, horizon, step, horizon).states[-1]
        if _l1_padded(p_m, p_2m) <= tol / 2:
            return M
        M *= 2


def limiting_cycle(sol: TransientSolution, t_star: float, period: float,
                   error_tag: Optional[float] = None) -> LimitCycle:
    """Restrict a solution to [t_star, t_star + period]."""
    lo, hi = t_star - GRID_ATOL, t_star + period + GRID_ATOL
    if sol.grid[0] > lo or sol.grid[-1] < hi - 2 * GRID_ATOL:
        raise ValueError(
            f"solution grid [{sol.grid[0]}, {sol.grid[-1]}] does not cover [{t_star}, {t_star + period}]")
    sel = (sol.grid >= lo) & (sol.grid <= hi)
    if sel.sum() < 2:
        raise ValueError("cycle window holds fewer than two grid points")
    return LimitCycle(sol.grid[sel], sol.states[sel], error_tag, float(sol.budget[sel][-1]))


def mean_customers(sol: TransientSolution, t: float) -> float:
    return float(sol.at(t) @ np.arange(sol.level + 1))


def stationary_homogeneous(g: TruncatedGenerator, rcond: float = 1e-13) -> np.ndarray:
    """Solve A pi = 0, sum(pi) = 1 for constant rates on the truncated space."""
    if not (g.lam.is_constant and g.mu.is_constant):
        raise ValueError("stationary solve needs constant rates")
    A = g.build_A(0.0).copy()
    A[-1, :] = 1.0
    rhs = np.zeros(g.level + 1)
    rhs[-1] = 1.0
    if 1.0 / np.linalg.cond(A) < rcond:
        raise np.linalg.LinAlgError("stationary system is numerically singular")
    return np.linalg.solve(A, rhs)
