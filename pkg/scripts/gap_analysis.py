"""Utilization gap between the blocking and the skipping system as q varies.

The gap is the period-averaged p_0 of the blocking system (service rate
mu (1 - q)) minus that of the skipping system (geometric batches, rate mu).
A constant-rate stationary solve is printed next to the periodic runs.

    python3 scripts/gap_analysis.py [--qs 0.5 0.7 0.9]
"""
import argparse
import dataclasses

from skipqueue import Constant, Geometric, config, pipeline
from skipqueue.generator import TruncatedGenerator
from skipqueue.kolmogorov import stationary_homogeneous

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qs", type=float, nargs="*", default=[0.5, 0.7, 0.9])
    ap.add_argument("--periodic", action="store_true", help="also run the periodic pipeline (slow for q near 1)")
    args = ap.parse_args()
    base = config.load("configs/fig9_compare.json")
    print("   q   mu_eff  stationary: p0_skip  p0_block  gap" + ("   periodic: gap" if args.periodic else ""))
    for q in args.qs:
        mu_eff = 1.0 - q
        g = TruncatedGenerator(400, Constant(0.8), Constant(1.0), Geometric(q))
        p_skip = stationary_homogeneous(g)[0]
        p_block = mu_eff / (0.8 + mu_eff)
        line = f"{q:5.2f}  {mu_eff:5.2f}  {p_skip:20.5f}  {p_block:8.5f}  {p_block - p_skip:.5f}"
        if args.periodic:
            cfg = dataclasses.replace(base, batch=Geometric(q), blocking_mu=mu_eff)
            line += f"   {pipeline.run_compare(cfg)[2].gap:.5f}"
        print(line)
