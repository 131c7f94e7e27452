"""Command-line front end.

    skipqueue bounds   --config scenario.json [--out DIR] [--paper-headline]
    skipqueue solve    --config scenario.json [--out DIR] [--step H] [--truncation-cap M]
    skipqueue simulate --config scenario.json [--out DIR] [--seed N]
    skipqueue compare  --config scenario.json [--out DIR]
    skipqueue validate-only --config scenario.json

Exit codes: 0 success, 1 usage or config error, 2 mathematical
infeasibility, 3 numerical budget failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import config as _config
from . import pipeline
from .errors import ConditionError, HeavyTailError, InfeasibleError, TruncationError

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3


def _num(x):
    if x is None:
        return ""
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) if not isinstance(v, str) else v for v in row])


def _write_json(path: Path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fail(code, reason, detail):
    print(json.dumps({"error": detail, "reason": reason, "exit_code": code}), file=sys.stderr)
    return code


def _out_dir(args, cfg) -> Path:
    return Path(args.out or cfg.out or ".")


def _apply_overrides(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.step is not None:
        changes["step"] = args.step
    if args.truncation_cap is not None:
        changes["truncation_cap"] = args.truncation_cap
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_bounds(cfg, args):
    cert = pipeline.certificate(cfg)
    doc = cert.to_json(headline=args.paper_headline)
    _write_json(_out_dir(args, cfg) / "certificate.json", doc)
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def _trajectory_rows(res, J):
    sol = res.primary
    J = min(J, sol.level)
    mean = sol.mean()
    bound = res.cert.bound_tv(sol.grid) if res.cert is not None else np.full(len(sol.grid), np.nan)
    pair = res.pair_distance if res.pair_distance is not None else np.full(len(sol.grid), np.nan)
    header = ["t"] + [f"p_{i}" for i in range(J + 1)] + ["mean", "l1_pair_distance", "bound_tv"]
    rows = ([t, *p[:J + 1], m, d, b] for t, p, m, d, b in zip(sol.grid, sol.states, mean, pair, bound))
    return header, rows, J


def cmd_solve(cfg, args):
    res = pipeline.run_solve(cfg)
    out = _out_dir(args, cfg)
    header, rows, J = _trajectory_rows(res, cfg.states)
    _write_csv(out / "trajectory.csv", header, rows)
    cyc = res.cycle
    mean = cyc.states @ np.arange(res.level + 1)
    _write_csv(out / "cycle.csv", ["t"] + [f"p_{i}" for i in range(J + 1)] + ["mean", "error_tag"],
               ([t, *p[:J + 1], m, cyc.error_tag] for t, p, m in zip(cyc.grid, cyc.states, mean)))
    summary = {
        "level": res.level,
        "cycle_start": res.cycle_start,
        "period": res.period,
        "t_end": float(res.primary.grid[-1]),
        "error_tag": cyc.error_tag,
        "budget": float(res.primary.budget[-1]),
        "cycle_avg_p0": cyc.period_average(0),
        "negative_alarms": res.primary.alarms,
        "certificate": res.cert.to_json(args.paper_headline) if res.cert is not None else None,
    }
    _write_json(out / "solve_summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_simulate(cfg, args):
    est = pipeline.run_simulate(cfg)
    p, hw = est.p_hat, est.half_width
    rows = ([t, str(i), p[j, i], hw[j, i]] for j, t in enumerate(est.t_grid) for i in range(p.shape[1]))
    _write_csv(_out_dir(args, cfg) / "simulation.csv", ["t", "state", "p_hat", "half_width"], rows)
    print(json.dumps({"replications": est.replications, "seed": est.seed,
                      "observations": len(est.t_grid), "max_state": int(p.shape[1] - 1)}))
    return EXIT_OK


def cmd_compare(cfg, args):
    res, block, report = pipeline.run_compare(cfg)
    sol = res.primary
    out = _out_dir(args, cfg)
    _write_csv(out / "compare.csv",
               ["t", "p0_skip", "p0_block", "utilization_skip", "utilization_block"],
               ([t, a, b, 1 - a, 1 - b] for t, a, b in zip(sol.grid, sol.p0(), block.p0)))
    summary = {"mu_eff": block.mu_eff, "cycle_start": res.cycle_start, "period": res.period,
               "avg_p0_skip": report.avg_p0_skip, "avg_p0_block": report.avg_p0_block,
               "gap": report.gap, "error_tag": res.cycle.error_tag}
    _write_json(out / "compare_summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


COMMANDS = {"bounds": cmd_bounds, "solve": cmd_solve, "simulate": cmd_simulate,
            "compare": cmd_compare, "validate-only": None}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario JSON file")
    common.add_argument("--out", help="output directory (default: config 'out' or cwd)")
    common.add_argument("--seed", type=int)
    common.add_argument("--step", type=float, help="RK4 step")
    common.add_argument("--truncation-cap", type=int)
    common.add_argument("--paper-headline", action="store_true",
                        help="also emit the headline N*w0 prefactor and its forgetting time")
    common.add_argument("--validate-only", action="store_true",
                        help="parse and check the config, compute nothing")
    parser = argparse.ArgumentParser(prog="skipqueue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = _apply_overrides(_config.load(args.config), args)
    except _config.ConfigError as exc:
        return _fail(EXIT_CONFIG, "invalid config", str(exc))
    if args.command == "validate-only" or args.validate_only:
        print(json.dumps({"valid": True, "config": args.config}))
        return EXIT_OK
    try:
        return COMMANDS[args.command](cfg, args)
    except HeavyTailError as exc:
        return _fail(EXIT_INFEASIBLE, HeavyTailError.reason, str(exc))
    except InfeasibleError as exc:
        return _fail(EXIT_INFEASIBLE, "infeasible (delta, epsilon)", str(exc))
    except ConditionError as exc:
        return _fail(EXIT_INFEASIBLE, "decay condition fails", str(exc))
    except TruncationError as exc:
        return _fail(EXIT_BUDGET, "truncation level too small", str(exc))
    except _config.ConfigError as exc:
        return _fail(EXIT_CONFIG, "invalid config", str(exc))


if __name__ == "__main__":
    sys.exit(main())
