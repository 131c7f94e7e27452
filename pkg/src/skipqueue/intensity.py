"""Time-varying rates lambda(t), mu(t).

Every form is an immutable dataclass that evaluates on scalars or numpy
arrays, integrates over [s, t] and carries a certified upper bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate as _quad

TWO_PI = 2.0 * math.pi


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise ValueError(f"time must be nonnegative, got {t!r}")


def _check_interval(s, t):
    _check_time(s)
    if s > t:
        raise ValueError(f"integration bounds reversed: s={s} > t={t}")


class IntensityFunction:
    """Base class. Subclasses define ``_eval``, ``integrate``, ``sup_bound`` and ``period``."""

    period: Optional[float] = None

    def __call__(self, t):
        _check_time(t)
        return self._eval(t)

    def eval(self, t):
        return self(t)

    def integrate(self, s: float, t: float) -> float:
        raise NotImplementedError

    @property
    def sup_bound(self) -> float:
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    def quad(self, s: float, t: float) -> float:
        """Adaptive quadrature of the rate, independent of the closed forms."""
        _check_interval(s, t)
        edges = [s, *self._kinks(s, t), t]
        return sum(_quad.quad(lambda u: float(self._eval(u)), a, b, epsabs=0.0,
                              epsrel=1e-12, limit=500)[0] for a, b in zip(edges, edges[1:]))

    def _kinks(self, s, t):
        """Points in (s, t) where the rate is not smooth."""
        return []


def _repeat_knots(knots, period, s, t):
    knots = np.asarray(knots, dtype=float)
    if period is None:
        pts = knots
    else:
        shifts = np.arange(np.floor(s / period), np.floor(t / period) + 1) * period
        pts = (shifts[:, None] + knots[None, :]).ravel()
    return sorted({float(x) for x in pts if s < x < t})


@dataclass(frozen=True)
class Constant(IntensityFunction):
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("constant rate must be nonnegative")

    def _eval(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), float(self.value))
        return float(self.value)

    def integrate(self, s, t):
        _check_interval(s, t)
        return self.value * (t - s)

    @property
    def sup_bound(self):
        return float(self.value)

    @property
    def is_constant(self):
        return True


@dataclass(frozen=True)
class Sinusoid(IntensityFunction):
    """``base + sin_amp*sin(2*pi*frequency*t) + cos_amp*cos(2*pi*frequency*t)``."""

    base: float
    sin_amp: float = 0.0
    cos_amp: float = 0.0
    frequency: float = 1.0

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.base < math.hypot(self.sin_amp, self.cos_amp):
            raise ValueError("sinusoid dips below zero: base < amplitude")

    @property
    def period(self):
        return 1.0 / self.frequency

    def _phase(self, t):
        # reduce to [0, 1) cycles so whole periods cancel exactly
        return TWO_PI * np.mod(np.multiply(self.frequency, t), 1.0)

    def _eval(self, t):
        ph = self._phase(t)
        out = self.base + self.sin_amp * np.sin(ph) + self.cos_amp * np.cos(ph)
        return out if np.ndim(out) else float(out)

    def _antideriv_periodic(self, t):
        ph = self._phase(t)
        w = TWO_PI * self.frequency
        return float((-self.sin_amp * np.cos(ph) + self.cos_amp * np.sin(ph)) / w)

    def integrate(self, s, t):
        _check_interval(s, t)
        return self.base * (t - s) + self._antideriv_periodic(t) - self._antideriv_periodic(s)

    @property
    def sup_bound(self):
        return self.base + math.hypot(self.sin_amp, self.cos_amp)


@dataclass(frozen=True)
class PiecewiseConstant(IntensityFunction):
    """``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``.

    With ``periodic=True`` the pattern repeats with period
    ``breakpoints[-1]``; otherwise the last value holds beyond it.
    """

    breakpoints: tuple
    values: tuple
    periodic: bool = False

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) != len(vals) + 1 or len(vals) == 0:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if bp[0] != 0.0 or any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if min(vals) < 0:
            raise ValueError("rates must be nonnegative")

    @property
    def period(self):
        return self.breakpoints[-1] if self.periodic else None

    def _cum(self):
        widths = np.diff(self.breakpoints)
        return np.concatenate([[0.0], np.cumsum(widths * np.asarray(self.values))])

    def _eval(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.periodic:
            t_arr = np.mod(t_arr, self.breakpoints[-1])
        idx = np.searchsorted(self.breakpoints, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        out = np.asarray(self.values)[idx]
        return out if np.ndim(out) else float(out)

    def _primitive(self, t):
        bp = self.breakpoints
        cum = self._cum()
        total = 0.0
        if self.periodic:
            n, t = divmod(t, bp[-1])
            total = n * cum[-1]
        elif t >= bp[-1]:
            return cum[-1] + self.values[-1] * (t - bp[-1])
        i = min(int(np.searchsorted(bp, t, side="right")) - 1, len(self.values) - 1)
        return total + cum[i] + self.values[i] * (t - bp[i])

    def integrate(self, s, t):
        _check_interval(s, t)
        return self._primitive(t) - self._primitive(s)

    def _kinks(self, s, t):
        return _repeat_knots(self.breakpoints, self.period, s, t)

    @property
    def sup_bound(self):
        return max(self.values)


@dataclass(frozen=True)
class TabulatedPositive(IntensityFunction):
    """Linear interpolation through ``(times, values)`` samples.

    If ``periodic`` the samples span one period starting at 0 and the
    first and last values must agree.
    """

    times: tuple
    values: tuple
    periodic: bool = False
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _v: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        if np.any(v < 0):
            raise ValueError("rates must be nonnegative")
        if self.periodic and abs(v[0] - v[-1]) > 1e-12:
            raise ValueError("periodic table needs matching end values")
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_v", v)

    @property
    def period(self):
        return float(self._t[-1]) if self.periodic else None

    def _eval(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.periodic:
            t_arr = np.mod(t_arr, self._t[-1])
        out = np.interp(t_arr, self._t, self._v)
        return out if np.ndim(out) else float(out)

    def integrate(self, s, t):
        _check_interval(s, t)
        if s == t:
            return 0.0
        if self.periodic:
            p = float(self._t[-1])
            one, _ = _quad.quad(self._eval, 0.0, p, points=self._t[1:-1], epsrel=1e-10,
                                limit=max(200, 4 * len(self._t)))
            ns, rs = divmod(s, p)
            nt, rt = divmod(t, p)
            return (nt - ns) * one + self._partial(rt) - self._partial(rs)
        return self._quad_span(s, t)

    def _kinks(self, s, t):
        return _repeat_knots(self._t, self.period, s, t)

    def _partial(self, r):
        return self._quad_span(0.0, r) if r > 0 else 0.0

    def _quad_span(self, s, t):
        inside = self._t[(self._t > s) & (self._t < t)]
        val, _ = _quad.quad(self._eval, s, t, points=inside if len(inside) else None,
                            epsrel=1e-10, limit=max(200, 4 * len(self._t)))
        return val

    @property
    def sup_bound(self):
        return float(self._v.max())


def period_average(f: IntensityFunction) -> float:
    if f.period is None:
        raise ValueError("period_average needs a periodic intensity")
    if isinstance(f, Sinusoid):
        return float(f.base)
    return f.integrate(0.0, f.period) / f.period


def common_period(*fs: IntensityFunction) -> Optional[float]:
    """Shared period of the given rates; constants fit any period.

    Returns None when every rate is constant. Raises if two periodic
    rates disagree.
    """
    periods = [f.period for f in fs if not f.is_constant]
    if any(p is None for p in periods):
        raise ValueError("rates must be constant or periodic")
    if not periods:
        return None
    p0 = periods[0]
    for p in periods[1:]:
        if abs(p - p0) > 1e-12 * max(1.0, p0):
            raise ValueError(f"rates have different periods: {p0} vs {p}")
    return p0


def from_config(spec: dict) -> IntensityFunction:
    """Build a rate from its tagged JSON form, e.g. ``{"form": "constant", "value": 1}``."""
    spec = dict(spec)
    form = spec.pop("form", None)
    builders = {
        "constant": (Constant, {"value"}),
        "sinusoid": (Sinusoid, {"base", "sin_amp", "cos_amp", "frequency"}),
        "piecewise": (PiecewiseConstant, {"breakpoints", "values", "periodic"}),
        "tabulated": (TabulatedPositive, {"times", "values", "periodic"}),
    }
    if form not in builders:
        raise ValueError(f"unknown intensity form {form!r}")
    cls, allowed = builders[form]
    extra = set(spec) - allowed
    if extra:
        raise ValueError(f"unknown keys for {form} intensity: {sorted(extra)}")
    if form in ("piecewise", "tabulated"):
        for key in ("breakpoints", "times", "values"):
            if key in spec:
                spec[key] = tuple(spec[key])
    return cls(**spec)


def to_config(f: IntensityFunction) -> dict:
    if isinstance(f, Constant):
        return {"form": "constant", "value": f.value}
    if isinstance(f, Sinusoid):
        return {"form": "sinusoid", "base": f.base, "sin_amp": f.sin_amp,
                "cos_amp": f.cos_amp, "frequency": f.frequency}
    if isinstance(f, PiecewiseConstant):
        return {"form": "piecewise", "breakpoints": list(f.breakpoints),
                "values": list(f.values), "periodic": f.periodic}
    if isinstance(f, TabulatedPositive):
        return {"form": "tabulated", "times": list(f.times), "values": list(f.values),
                "periodic": f.periodic}
    raise TypeError(type(f))
