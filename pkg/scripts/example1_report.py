"""Example 1: certificate constants next to the measured forgetting of the initial state.

    python3 scripts/example1_report.py
"""
import numpy as np

from skipqueue import Geometric, Sinusoid, certify
from skipqueue.generator import TruncatedGenerator
from skipqueue.kolmogorov import choose_truncation, pair_distance

lam, mu, batch = Sinusoid(1, 1, 0, 1), Sinusoid(1, 0, 1, 1), Geometric(0.5)
cert = certify(batch, lam, mu, 0.5, 0.1, tol=1e-3, N_override=2.0)
print(f"a = {cert.a}, N = {cert.N} (tight {cert.N_tight:.6f}), K = {cert.K}, "
      f"w0 = {cert.w0_bound}, W = {cert.W}")
print(f"t* headline (N w0 = {cert.N * cert.w0_bound:g}): {cert.t_star(headline=True):.4f}")
print(f"t* conservative (4 N w0 = {4 * cert.N * cert.w0_bound:g}): {cert.t_star():.4f}")

M = choose_truncation(lam, mu, batch, 31.0, 1e-6)
grid, dist, s0, _ = pair_distance(TruncatedGenerator(M, lam, mu, batch), 0, 5, 31.0)
print(f"truncation level M = {M}")
print("   t    ||p0 - p5||     bound_tv   E(t,0)")
for t in (0, 1, 2, 5, 10, 15, 20, 25, 30):
    i = s0.index(t)
    print(f"{t:4d}  {dist[i]:11.3e}  {cert.bound_tv(t):11.3e}  {s0.mean()[i]:.5f}")
print(f"max dist / bound on [0, 31]: {np.max(dist / cert.bound_tv(grid)):.3e}")
