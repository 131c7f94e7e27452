"""Scenario configuration: one strict JSON document per experiment."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import batch as _batch
from . import intensity as _intensity


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    lam: _intensity.IntensityFunction
    mu: _intensity.IntensityFunction
    batch: _batch.BatchDistribution
    name: str = ""
    initial: list = field(default_factory=lambda: [0])
    horizon: Optional[float] = None
    tol: float = 1e-3
    truncation_tol: float = 1e-6
    level: Optional[int] = None
    truncation_cap: int = 100_000
    budget_cap: float = 1e-3
    step: float = 1e-3
    stride: float = 1e-2
    seed: int = 0
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    N_override: Optional[float] = None
    states: int = 3
    replications: int = 1000
    observe: Optional[list] = None
    blocking_mu: Optional[float] = None
    out: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.initial, int):
            self.initial = [self.initial]
        if not self.initial or any(not isinstance(k, int) or k < 0 for k in self.initial):
            raise ConfigError("initial must be a nonnegative state or a list of them")
        if (self.delta is None) != (self.epsilon is None):
            raise ConfigError("delta and epsilon must be pinned together")
        for name in ("tol", "truncation_tol", "budget_cap", "step", "stride"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.horizon is not None and self.horizon <= 0:
            raise ConfigError("horizon must be positive")
        if self.replications < 1 or self.states < 0:
            raise ConfigError("replications >= 1 and states >= 0 required")
        if self.blocking_mu is not None and self.blocking_mu <= 0:
            raise ConfigError("blocking_mu must be positive")


# JSON key -> dataclass field
_RENAMED = {"lambda": "lam"}
_PLAIN = {f.name for f in fields(ScenarioConfig)} - {"lam", "mu", "batch"}


def parse(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _PLAIN - {"lambda", "mu", "batch"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("lambda", "mu", "batch"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")
    try:
        kwargs = {
            "lam": _intensity.from_config(doc["lambda"]),
            "mu": _intensity.from_config(doc["mu"]),
            "batch": _batch.from_config(doc["batch"]),
        }
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    kwargs.update({_RENAMED.get(k, k): v for k, v in doc.items() if k in _PLAIN})
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse(doc)


def dump(cfg: ScenarioConfig) -> dict:
    out = {"lambda": _intensity.to_config(cfg.lam), "mu": _intensity.to_config(cfg.mu),
           "batch": _batch.to_config(cfg.batch)}
    for name in sorted(_PLAIN):
        out[name] = getattr(cfg, name)
    return out
