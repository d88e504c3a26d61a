"""Command line entry point.

Exit codes: 0 when every gating criterion passes, 1 when one fails, 2 for an
invalid config, an unknown scenario or a parameter the library rejects.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .config import ConfigError, load_config
from .report import ReportError, emit_report
from .scenarios import SCENARIOS

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flightlab", description="Random-flight simulation and verification scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenario described by a config file")
    run.add_argument("config", help="YAML scenario config")
    run.add_argument("--out", help="output directory (overrides output_dir in the config)")
    run.add_argument("--threads", type=int, default=1, help="worker threads for replica pools (default 1)")
    run.add_argument("--no-plots", action="store_true", help="skip SVG plots")
    sub.add_parser("list-scenarios", help="print the known scenario names")
    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config")
    return ap


def _config_error(exc: ConfigError) -> int:
    for line in exc.problems:
        print(f"config error: {line}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _config_error(exc)
    if args.threads < 1:
        print("config error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output_dir or Path("results") / cfg.scenario)
    scenario = SCENARIOS[cfg.scenario]
    t0 = time.perf_counter()
    try:
        result = scenario.runner(cfg.params, cfg.seed, args.threads)
    except (ValueError, KeyError) as exc:
        print(f"config error: scenario {cfg.scenario} rejected its parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    elapsed = dict(result.elapsed, total=time.perf_counter() - t0)
    try:
        report = emit_report(result.records, out, scenario=cfg.scenario, config=cfg.to_dict(), seeds=result.seeds,
                             tables=result.tables, elapsed=elapsed, plots=not args.no_plots)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for rec in report["records"]:
        tag = "PASS" if rec["passed"] else ("FAIL" if rec["gating"] else "info")
        print(f"{tag}  {cfg.scenario}/{rec['criterion']}")
    print(f"report: {out / 'report.json'}")
    failing = [r for r in report["records"] if r["gating"] and not r["passed"]]
    for rec in failing:
        print("failed: " + json.dumps(rec, sort_keys=True), file=sys.stderr)
    return EXIT_FAIL if failing else EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _config_error(exc)
    print(f"ok: {args.config} ({cfg.scenario}, seed {cfg.seed})")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, sc in SCENARIOS.items():
            print(f"{name:20s} {sc.summary}")
        return EXIT_OK
    if args.command == "validate":
        return cmd_validate(args)
    return cmd_run(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
