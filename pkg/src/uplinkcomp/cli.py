"""Command-line entry point: ``uplinkcomp run`` and ``uplinkcomp trace``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .experiments import (MODES, PRESETS, ThetaGrid, dump_protocol_trace, load_config, preset,
                          run_experiment)


class _JsonErrorParser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, code=2)


def _fail(kind, message, code=1):
    print(json.dumps({"status": "error", "error": kind, "message": message}), file=sys.stderr)
    sys.exit(code)


def build_parser() -> argparse.ArgumentParser:
    parser = _JsonErrorParser(prog="uplinkcomp",
                                     description="Two-cell uplink cooperation outage experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", choices=PRESETS)
        src.add_argument("--config", help="JSON experiment file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (run) or file (trace)")

    run = sub.add_parser("run", help="write outage curves and a report")
    common(run)
    run.add_argument("--draws", type=int, help="Monte Carlo draws per grid point")
    run.add_argument("--mode", choices=MODES + ("both",), default=None)
    run.add_argument("--grid", help="threshold grid start:stop:step in dB")
    run.add_argument("--x-max", type=float, help="interferer field truncation radius")
    run.add_argument("--workers", type=int)

    trace = sub.add_parser("trace", help="dump controller traces for single draws")
    common(trace)
    trace.add_argument("--draws", type=int, default=1000)
    trace.add_argument("--theta-db", type=float, default=0.0)
    trace.add_argument("--scheme", default="AW+DIS", choices=("AW+SIC", "AW+DIS"))
    return parser


def _config(args):
    cfg = preset(args.preset) if args.preset else load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _run(args) -> dict:
    cfg = _config(args)
    changes = {}
    if args.draws is not None:
        changes["n_draws"] = args.draws
    if args.mode is not None:
        changes["modes"] = MODES if args.mode == "both" else (args.mode,)
    if args.grid is not None:
        changes["grid"] = ThetaGrid.parse(args.grid)
    if args.x_max is not None:
        changes["x_max"] = args.x_max
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.out is not None:
        changes["out_dir"] = args.out
    report = run_experiment(replace(cfg, **changes))
    return {"status": "ok", "files": report["files"]}


def _trace(args) -> dict:
    cfg = _config(args)
    out = args.out or f"{cfg.name}_trace.txt"
    summary = dump_protocol_trace(cfg, args.draws, cfg.seed, out, args.theta_db, args.scheme)
    return {"status": "ok", "file": out, **summary}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = _run(args) if args.command == "run" else _trace(args)
    except (ValueError, OSError, RuntimeError) as exc:
        _fail(type(exc).__name__, str(exc))
    print(json.dumps(result))
    return 0
