"""M_t/M/1/0 comparator solved through its integrating factor, and the idle-probability comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _quad

from .intensity import IntensityFunction
from .kolmogorov import GRID_ATOL, LimitCycle


@dataclass
class BlockingSolution:
    grid: np.ndarray
    p0: np.ndarray
    mu_eff: float

    @property
    def p1(self):
        return 1.0 - self.p0

    def window(self, start: float, stop: float) -> "BlockingSolution":
        sel = (self.grid >= start - GRID_ATOL) & (self.grid <= stop + GRID_ATOL)
        return BlockingSolution(self.grid[sel], self.p0[sel], self.mu_eff)

    def period_average(self) -> float:
        return float(np.trapezoid(self.p0, self.grid) / (self.grid[-1] - self.grid[0]))


def solve_blocking(lam: IntensityFunction, mu_eff: float, p0_init: float, t_end: float,
                   stride: float = 1e-2, grid=None) -> BlockingSolution:
    """p_0(t) of the two-state chain dp_0/dt = mu_eff - (lambda(t) + mu_eff) p_0.

    Advanced interval by interval with
    p_0(t') = p_0(t) e^{-(Lam(t') - Lam(t))} + mu_eff int_t^t' e^{Lam(s) - Lam(t')} ds,
    Lam(t) = int_0^t (lambda + mu_eff); the integral by adaptive quadrature.
    """
    if mu_eff <= 0:
        raise ValueError("effective service rate must be positive")
    if not 0.0 <= p0_init <= 1.0:
        raise ValueError("p0_init must be a probability")
    if grid is None:
        n = max(1, int(round(t_end / stride)))
        grid = np.linspace(0.0, t_end, n + 1)
    grid = np.asarray(grid, dtype=float)
    p0 = np.empty_like(grid)
    p0[0] = p0_init
    if grid[0] != 0.0:
        # bring the initial condition from 0 to the first grid point
        p0[0] = _advance(lam, mu_eff, p0_init, 0.0, grid[0])
    for i in range(1, len(grid)):
        p0[i] = _advance(lam, mu_eff, p0[i - 1], grid[i - 1], grid[i])
    return BlockingSolution(grid, p0, float(mu_eff))


def _advance(lam, mu_eff, p, t0, t1):
    def big_lam(s):
        return lam.integrate(t0, s) + mu_eff * (s - t0)

    total = big_lam(t1)
    inner, _ = _quad.quad(lambda s: math.exp(big_lam(s) - total), t0, t1,
                          epsabs=0.0, epsrel=1e-10)
    return p * math.exp(-total) + mu_eff * inner


@dataclass
class UtilizationReport:
    grid: np.ndarray
    p0_skip: np.ndarray
    p0_block: np.ndarray
    avg_p0_skip: float
    avg_p0_block: float

    @property
    def difference(self):
        return self.p0_skip - self.p0_block

    @property
    def utilization_skip(self):
        return 1.0 - self.p0_skip

    @property
    def utilization_block(self):
        return 1.0 - self.p0_block

    @property
    def gap(self) -> float:
        """Period-averaged p_0 of the blocking system minus that of the skipping one."""
        return self.avg_p0_block - self.avg_p0_skip


def compare_utilization(skip: LimitCycle, block: BlockingSolution) -> UtilizationReport:
    if skip.grid.shape != block.grid.shape or np.max(np.abs(skip.grid - block.grid)) > GRID_ATOL:
        raise ValueError("skip and blocking windows are not aligned")
    return UtilizationReport(skip.grid, skip.p0.copy(), block.p0.copy(),
                             skip.period_average(0), block.period_average())
