"""Monte Carlo oracle for the queue-skipping chain with time-varying rates.

Events are generated by thinning. Candidates arrive as one homogeneous
Poisson stream with rate L + sup(mu); each candidate is an arrival with
probability L / (L + sup mu), otherwise a service completion, and is kept
with probability lambda(t)/L or mu(t)/sup(mu). Every candidate consumes
one row of four uniforms (gap, type, acceptance, batch size), drawn in
fixed chunks from a per-replication Philox stream keyed by
(seed, replication index). ``sample_path`` and the vectorised
``estimate`` therefore see identical event sequences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CHUNK = 64


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for replication ``index``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _bounds(model):
    L, Mu = model.lam.sup_bound, model.mu.sup_bound
    if L <= 0 or Mu <= 0:
        raise ValueError("thinning needs positive sup bounds for both rates")
    return L, Mu


@dataclass
class Path:
    times: np.ndarray  # jump times, times[0] = 0
    states: np.ndarray  # state held from times[i] until times[i+1]
    horizon: float

    def state_at(self, t):
        return self.states[np.searchsorted(self.times, t, side="right") - 1]


def skip_rule(current, batch):
    """New state after a batch arrives: the batch replaces the content iff it is larger."""
    return np.where(batch > current, batch, current)


def sample_path(rng: np.random.Generator, model, initial: int, horizon: float) -> Path:
    """One trajectory on [0, horizon]. ``model`` needs ``lam``, ``mu`` and ``batch``."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    L, Mu = _bounds(model)
    total = L + Mu
    p_arr = L / total
    t, state = 0.0, int(initial)
    times, states = [0.0], [state]
    while True:
        U = rng.random((CHUNK, 4))
        batches = model.batch.sample(U[:, 3])
        for (u_gap, u_type, u_acc, _), size in zip(U, batches):
            t += -np.log1p(-u_gap) / total
            if t > horizon:
                return Path(np.asarray(times), np.asarray(states, dtype=np.int64), horizon)
            if u_type < p_arr:
                if u_acc * L < model.lam(t) and size > state:
                    state = int(size)
                    times.append(t)
                    states.append(state)
            elif state > 0 and u_acc * Mu < model.mu(t):
                state -= 1
                times.append(t)
                states.append(state)


@dataclass
class SimulationEstimate:
    t_grid: np.ndarray
    counts: np.ndarray  # (len(t_grid), n_states)
    replications: int
    seed: int

    @property
    def p_hat(self):
        return self.counts / self.replications

    @property
    def half_width(self):
        p = self.p_hat
        return 1.96 * np.sqrt(p * (1.0 - p) / self.replications)


def estimate(model, initial: int, t_grid, R: int, seed: int) -> SimulationEstimate:
    """R replications observed at ``t_grid``, advanced in lockstep across replications."""
    if R < 1:
        raise ValueError("need at least one replication")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) < 0):
        raise ValueError("observation times must be nonnegative and sorted")
    L, Mu = _bounds(model)
    total = L + Mu
    p_arr = L / total
    horizon = float(t_grid[-1])
    rngs = [replication_rng(seed, r) for r in range(R)]
    t = np.zeros(R)
    state = np.full(R, int(initial), dtype=np.int64)
    seen = np.full((len(t_grid), R), -1, dtype=np.int64)
    active = np.arange(R)
    while active.size:
        U = np.stack([rngs[r].random((CHUNK, 4)) for r in active])
        sizes = model.batch.sample(U[:, :, 3])
        ta, sa = t[active], state[active]
        running = np.ones(active.size, dtype=bool)
        for k in range(CHUNK):
            t_new = ta - np.log1p(-U[:, k, 0]) / total
            for j, tau in enumerate(t_grid):
                hit = running & (ta <= tau) & (t_new > tau)
                if hit.any():
                    seen[j, active[hit]] = sa[hit]
            running &= t_new <= horizon
            is_arr = U[:, k, 1] < p_arr
            lam_t = model.lam(np.minimum(t_new, horizon))
            mu_t = model.mu(np.minimum(t_new, horizon))
            arr = running & is_arr & (U[:, k, 2] * L < lam_t)
            srv = running & ~is_arr & (sa > 0) & (U[:, k, 2] * Mu < mu_t)
            sa = np.where(arr, skip_rule(sa, sizes[:, k]), sa)
            sa = np.where(srv, sa - 1, sa)
            ta = np.where(running, t_new, ta)
            if not running.any():
                break
        t[active], state[active] = ta, sa
        active = active[running]
    n_states = int(seen.max()) + 1
    counts = np.stack([np.bincount(row, minlength=n_states) for row in seen])
    return SimulationEstimate(t_grid, counts, R, seed)
