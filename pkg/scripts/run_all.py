"""Run every scenario config in ``configs/`` and print a one-line summary per scenario.

    python scripts/run_all.py [--threads N] [--out results] [--no-plots]

The exit code is the largest one returned by the individual runs.
"""
import argparse
import contextlib
import io
import json
import time
from pathlib import Path

from flightlab.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results")
    ap.add_argument("--no-plots", action="store_true")
    args = ap.parse_args()
    worst = 0
    for cfg in sorted((ROOT / "configs").glob("*.yaml")):
        out = Path(args.out) / cfg.stem
        argv = ["run", str(cfg), "--out", str(out), "--threads", str(args.threads)]
        if args.no_plots:
            argv.append("--no-plots")
        t0 = time.perf_counter()
        with contextlib.redirect_stdout(io.StringIO()):
            code = cli_main(argv)
        worst = max(worst, code)
        line = f"{cfg.stem:20s} exit {code}  {time.perf_counter() - t0:7.1f} s"
        report = out / "report.json"
        if report.exists():
            recs = json.loads(report.read_text())["records"]
            bad = [r["criterion"] for r in recs if r["gating"] and not r["passed"]]
            line += f"  {sum(r['passed'] for r in recs)}/{len(recs)} records pass"
            if bad:
                line += "  failing: " + ", ".join(bad)
        print(line)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
