"""End-to-end runs behind the CLI: certificate -> truncation -> transient solve -> limit cycle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds, kolmogorov
from .blocking import BlockingSolution, UtilizationReport, compare_utilization, solve_blocking
from .config import ConfigError, ScenarioConfig
from .errors import ConditionError, HeavyTailError, InfeasibleError
from .generator import TruncatedGenerator
from .intensity import common_period
from .simulate import SimulationEstimate, estimate


def certificate(cfg: ScenarioConfig) -> bounds.ErgodicityCertificate:
    if cfg.delta is not None:
        return bounds.certify(cfg.batch, cfg.lam, cfg.mu, cfg.delta, cfg.epsilon, tol=cfg.tol,
                              N_override=cfg.N_override)
    cert = bounds.search_delta_eps(cfg.batch, cfg.lam, cfg.mu, tol=cfg.tol)
    if cfg.N_override is not None:
        cert = bounds.certify(cfg.batch, cfg.lam, cfg.mu, cert.delta, cert.epsilon, tol=cfg.tol,
                              N_override=cfg.N_override)
    return cert


def period_of(cfg: ScenarioConfig) -> float:
    p = common_period(cfg.lam, cfg.mu)
    return 1.0 if p is None else p


@dataclass
class SolveResult:
    level: int
    solutions: list
    cycle: kolmogorov.LimitCycle
    cert: Optional[bounds.ErgodicityCertificate]
    cycle_start: float
    period: float
    pair_distance: Optional[np.ndarray]

    @property
    def primary(self) -> kolmogorov.TransientSolution:
        return self.solutions[0]


def try_certificate(cfg: ScenarioConfig):
    """Certificate, or None when the batch law or rates admit none."""
    try:
        return certificate(cfg)
    except (HeavyTailError, InfeasibleError, ConditionError):
        return None


def run_solve(cfg: ScenarioConfig, cert=None) -> SolveResult:
    if cert is None:
        cert = try_certificate(cfg)
    period = period_of(cfg)
    if cfg.horizon is not None:
        t_end = cfg.horizon
        start = max(0.0, t_end - period)
    elif cert is not None:
        start = math.ceil(cert.t_star() / cfg.stride - 1e-9) * cfg.stride
        t_end = start + period
    else:
        raise ConfigError("no certificate available: set 'horizon' explicitly")
    level = cfg.level
    if level is None:
        level = kolmogorov.choose_truncation(cfg.lam, cfg.mu, cfg.batch, t_end, cfg.truncation_tol,
                                             cap=cfg.truncation_cap, initial=max(cfg.initial))
    elif level > cfg.truncation_cap:
        raise ConfigError(f"level {level} exceeds truncation cap {cfg.truncation_cap}")
    elif level < max(cfg.initial):
        raise ConfigError(f"initial state {max(cfg.initial)} lies above level {level}")
    g = TruncatedGenerator(level, cfg.lam, cfg.mu, cfg.batch)
    sols = kolmogorov.solve_many(g, cfg.initial, t_end, cfg.step, cfg.stride, cfg.budget_cap)
    tag = float(cert.bound_tv(start)) if cert is not None else None
    cycle = kolmogorov.limiting_cycle(sols[0], start, min(period, t_end - start), tag)
    pair = None
    if len(sols) > 1:
        pair = np.abs(sols[0].states - sols[1].states).sum(axis=1)
    return SolveResult(level, sols, cycle, cert, start, period, pair)


def blocking_rate(cfg: ScenarioConfig) -> float:
    if cfg.blocking_mu is not None:
        return cfg.blocking_mu
    if not cfg.mu.is_constant:
        raise ConfigError("blocking_mu is required when mu is time-varying")
    return cfg.mu.sup_bound / cfg.batch.mean()


def run_compare(cfg: ScenarioConfig):
    """Queue-skipping solve next to the blocking system with service rate mu / mean batch."""
    res = run_solve(cfg)
    sol = res.primary
    p0_init = float(sol.states[0, 0])
    block = solve_blocking(cfg.lam, blocking_rate(cfg), p0_init, sol.grid[-1], grid=sol.grid)
    window = block.window(res.cycle.grid[0], res.cycle.grid[-1])
    report = compare_utilization(res.cycle, window)
    return res, block, report


def run_simulate(cfg: ScenarioConfig, replications=None) -> SimulationEstimate:
    if cfg.observe is not None:
        t_grid = np.asarray(cfg.observe, dtype=float)
    elif cfg.horizon is not None:
        t_grid = np.arange(0.0, math.floor(cfg.horizon) + 1.0)
    else:
        raise ConfigError("simulate needs 'observe' or 'horizon'")
    R = cfg.replications if replications is None else replications
    model = TruncatedGenerator(1, cfg.lam, cfg.mu, cfg.batch)
    return estimate(model, cfg.initial[0], t_grid, R, cfg.seed)
