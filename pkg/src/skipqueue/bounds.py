"""Ergodicity certificates: decay envelope, weighted-norm constants, forgetting time."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .batch import BatchDistribution, TailClass
from .errors import ConditionError, HeavyTailError, InfeasibleError
from .generator import WeightSequence, alpha_lambda_coefficient
from .intensity import IntensityFunction, common_period, period_average

EXAMPLE_PAIR = (0.5, 0.1)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    min_coefficient: float
    argmin: int
    witness: Optional[int]
    scanned_to: int


def _require_boundable(batch: BatchDistribution) -> TailClass:
    tc = batch.tail_class()
    if tc.kind == "heavy":
        raise HeavyTailError(
            f"{HeavyTailError.reason}: batch law {batch!r} has no geometric tail certificate")
    return tc


def feasibility(batch: BatchDistribution, delta: float, epsilon: float) -> Feasibility:
    """Check B_k - b_{k-2}(delta^2 + ... + delta^(k-1)) >= -epsilon for every column k.

    Columns run over the nonzero states 1..b*. For an infinite support the
    scan stops once C q^(k-2) delta^2 / (1 - delta) < epsilon, after which
    the subtracted term alone cannot push a coefficient below -epsilon.
    """
    if not 0.0 < delta < 1.0 or epsilon <= 0:
        raise ValueError("need 0 < delta < 1 and epsilon > 0")
    tc = _require_boundable(batch)
    if tc.kind == "finite":
        kmax = int(batch.support_max)
    else:
        ratio = epsilon * (1.0 - delta) / (tc.C * delta**2)
        extra = 0 if ratio >= 1 else math.ceil(math.log(ratio) / math.log(tc.q))
        kmax = max(3, 2 + extra + 1)
    k = np.arange(1, kmax + 1)
    coef = np.asarray(alpha_lambda_coefficient(batch, delta, k), dtype=float)
    i = int(np.argmin(coef))
    ok = bool(coef[i] >= -epsilon)
    return Feasibility(ok, float(coef[i]), int(k[i]), None if ok else int(k[i]), kmax)


def alpha_star(delta: float, epsilon: float, lam: IntensityFunction, mu: IntensityFunction, t):
    """Lower envelope (1 - delta) mu(t) - epsilon lambda(t) of the column rates."""
    return (1.0 - delta) * mu(t) - epsilon * lam(t)


def alpha_star_integral(delta, epsilon, lam, mu, s, t):
    return (1.0 - delta) * mu.integrate(s, t) - epsilon * lam.integrate(s, t)


def envelope(lam: IntensityFunction, mu: IntensityFunction, delta: float, epsilon: float,
             _table=None):
    """Return (N, a) with exp(-int_s^t alpha*) <= N exp(-a (t - s)).

    a is the period average of alpha*, N = exp(osc Phi) where
    Phi(t) = int_0^t (alpha* - a) over one period.
    """
    period = common_period(lam, mu)
    if period is None:
        a = (1.0 - delta) * mu.sup_bound - epsilon * lam.sup_bound
        if a <= 0:
            raise ConditionError(f"alpha* = {a} <= 0: no exponential decay")
        return 1.0, a
    a = (1.0 - delta) * _avg(mu, period) - epsilon * _avg(lam, period)
    if a <= 0:
        raise ConditionError(
            f"period-averaged alpha* = {a} <= 0: the decay integral does not diverge")

    def phi(t):
        return alpha_star_integral(delta, epsilon, lam, mu, 0.0, t) - a * t

    grid, int_lam, int_mu = _table if _table is not None else _primitive_table(lam, mu, period)
    vals = (1.0 - delta) * int_mu - epsilon * int_lam - a * grid
    hi = _refine(phi, grid, vals, int(np.argmax(vals)), sign=-1.0)
    lo = _refine(phi, grid, vals, int(np.argmin(vals)), sign=1.0)
    return math.exp(hi - lo), a


def _primitive_table(lam, mu, period):
    """Grid over one period (knots included) with int_0^t lambda and int_0^t mu."""
    grid = np.linspace(0.0, period, 4097)
    for f in (lam, mu):
        knots = getattr(f, "breakpoints", None) or getattr(f, "times", None)
        if knots is not None:
            knots = np.asarray(knots, dtype=float)
            grid = np.union1d(grid, knots[knots <= period])
    int_lam = np.array([lam.integrate(0.0, t) for t in grid])
    int_mu = np.array([mu.integrate(0.0, t) for t in grid])
    return grid, int_lam, int_mu


def _avg(f, period):
    if f.is_constant:
        return f.sup_bound
    return period_average(f)


def _refine(phi, grid, vals, i, sign):
    best = vals[i]
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: sign * phi(t), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-12})
        cand = phi(float(res.x))
        best = max(best, cand) if sign < 0 else min(best, cand)
    return best


@dataclass(frozen=True)
class KBound:
    closed_form: Optional[float]  # C L q^2 / (delta (1 - q))
    series: Optional[float]  # sum_i d_i L C q^i / (1 - q), finite iff delta > q
    flagged: bool  # series divergent, only the closed form is available

    @property
    def value(self):
        return self.closed_form if self.closed_form is not None else self.series


def compute_K(batch: BatchDistribution, delta: float, L: float) -> KBound:
    """Bound on ||D T f(t)||, the forcing term in the weighted norm."""
    tc = _require_boundable(batch)
    if tc.kind == "finite":
        n = int(batch.support_max)
        d = WeightSequence(delta).array(n)
        return KBound(None, L * float(np.dot(d, batch.tail_array(n))), False)
    C, q = tc.C, tc.q
    closed = C * L * q**2 / (delta * (1.0 - q))
    if delta > q:
        series = C * L * q * delta / ((1.0 - q) * (delta - q))
        return KBound(closed, series, False)
    return KBound(closed, None, True)


def limiting_norm_bound(N: float, K: float, a: float) -> float:
    return N * K / a


def compute_W(delta: float) -> float:
    """inf_k d_k / k, scanning until d_{k+1}/(k+1) >= d_k/k holds for good."""
    w = WeightSequence(delta)
    best = 1.0
    k = 1
    while True:
        # ratio of consecutive terms, delta^-1 k/(k+1), is increasing in k
        if (k / (k + 1)) / delta >= 1.0:
            return best
        k += 1
        best = min(best, w.d(k) / k)


@dataclass(frozen=True)
class ErgodicityCertificate:
    delta: float
    epsilon: float
    a: float
    N: float
    N_tight: float
    K: float
    K_series: Optional[float]
    K_flagged: bool
    w0_bound: float
    W: float
    L: float
    tol: float
    lam: Optional[IntensityFunction] = field(default=None, repr=False, compare=False)
    mu: Optional[IntensityFunction] = field(default=None, repr=False, compare=False)

    def alpha_star(self, t):
        return alpha_star(self.delta, self.epsilon, self.lam, self.mu, t)

    def bound_tv(self, t):
        """Conservative l1 bound 4 N exp(-a t) w0 on ||p*(t) - p**(t)||."""
        return 4.0 * self.N * np.exp(-self.a * np.asarray(t)) * self.w0_bound

    def bound_mean(self, t):
        return self.bound_tv(t) / self.W

    def bound_headline(self, t):
        """Headline form N w0 exp(-a t); equals 20 exp(-0.4 t) for Example 1."""
        return self.N * np.exp(-self.a * np.asarray(t)) * self.w0_bound

    def t_star(self, tol: Optional[float] = None, headline: bool = False) -> float:
        tol = self.tol if tol is None else tol
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        pref = self.N * self.w0_bound * (1.0 if headline else 4.0)
        return max(0.0, math.log(pref / tol) / self.a)

    def to_json(self, headline: bool = False) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("lam", "mu")}
        out["t_star"] = self.t_star()
        if headline:
            out["t_star_headline"] = self.t_star(headline=True)
            out["headline_prefactor"] = self.N * self.w0_bound
        return out


def certify(batch, lam, mu, delta, epsilon, tol=1e-3, N_override=None,
            _table=None) -> ErgodicityCertificate:
    """Certificate for a fixed (delta, epsilon)."""
    feas = feasibility(batch, delta, epsilon)
    if not feas.feasible:
        raise InfeasibleError(
            f"(delta={delta}, epsilon={epsilon}) infeasible: coefficient {feas.min_coefficient:.6g} "
            f"< -epsilon at k={feas.witness}", {(delta, epsilon): feas.witness})
    N_tight, a = envelope(lam, mu, delta, epsilon, _table=_table)
    N = N_tight if N_override is None else float(N_override)
    if N < N_tight * (1 - 1e-12):
        raise ValueError(f"N override {N} is below the tight envelope constant {N_tight}")
    L = lam.sup_bound
    kb = compute_K(batch, delta, L)
    # the series is the actual bound on ||D T f||; the closed form only stands in when it diverges
    K = kb.series if kb.series is not None else kb.closed_form
    return ErgodicityCertificate(delta, epsilon, a, N, N_tight, K, kb.series, kb.flagged,
                                 limiting_norm_bound(N, K, a), compute_W(delta), L, tol,
                                 lam=lam, mu=mu)


def default_grid():
    deltas = np.round(np.linspace(0.05, 0.95, 19), 10)
    epsilons = np.round(np.logspace(-3, 0, 31), 12)
    return deltas, epsilons


def search_delta_eps(batch, lam, mu, tol=1e-3, refine=True) -> ErgodicityCertificate:
    """Grid search over (delta, epsilon) minimising t_star(tol).

    Pairs whose K comes from a convergent series (delta > q) always beat
    flagged ones. Ties go to the smaller delta, then the smaller epsilon.
    A finer local grid around the winning cell is searched afterwards.
    """
    _require_boundable(batch)
    deltas, epsilons = default_grid()
    best, witnesses = _scan(batch, lam, mu, tol, deltas, epsilons)
    if best is None:
        raise InfeasibleError("no feasible (delta, epsilon) on the search grid", witnesses)
    if refine:
        d0, e0 = best.delta, best.epsilon
        fine_d = np.round(np.linspace(max(d0 - 0.05, 0.01), min(d0 + 0.05, 0.99), 11), 10)
        fine_e = np.round(e0 * np.logspace(-0.1, 0.1, 11), 12)
        cand, _ = _scan(batch, lam, mu, tol, fine_d, fine_e)
        if cand is not None and _key(cand) < _key(best):
            best = cand
    return best


def _key(cert):
    return (cert.K_flagged, round(cert.t_star(), 12), cert.delta, cert.epsilon)


def _scan(batch, lam, mu, tol, deltas, epsilons):
    best = None
    witnesses = {}
    period = common_period(lam, mu)
    table = None if period is None else _primitive_table(lam, mu, period)
    for d in deltas:
        for e in epsilons:
            try:
                cert = certify(batch, lam, mu, float(d), float(e), tol=tol, _table=table)
            except InfeasibleError as exc:
                witnesses.update(exc.witnesses)
                continue
            except ConditionError:
                witnesses[(float(d), float(e))] = "alpha* average <= 0"
                continue
            if best is None or _key(cert) < _key(best):
                best = cert
    return best, witnesses
