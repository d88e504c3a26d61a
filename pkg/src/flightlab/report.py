"""Machine-readable reports: report.json, one CSV per table, optional SVG plots."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .rng import RNG_ALGORITHM
from .scenarios import Record, Table

SCHEMA_VERSION = 1


class ReportError(RuntimeError):
    pass


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays become Python values, non-finite floats become strings."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def build_report(records: Iterable[Record], *, scenario: str, config: dict, seeds: list,
                 elapsed: Optional[dict] = None, artifacts: Iterable[str] = ()) -> dict:
    records = list(records)
    if not records:
        raise ReportError("no records to report")
    gating = [r for r in records if r.gating]
    return _plain({
        "schema_version": SCHEMA_VERSION,
        "library": {"name": "flightlab", "version": __version__},
        "rng_algorithm": RNG_ALGORITHM,
        "scenario": scenario,
        "config": config,
        "seeds": seeds,
        "passed": all(r.passed for r in gating),
        "records": [dataclasses.asdict(r) for r in records],
        "artifacts": sorted(artifacts),
        # everything that varies between identical runs lives under this key
        "timestamp": {
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "elapsed_seconds": elapsed or {},
        },
    })


def write_table_csv(path, table: Table) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow(["" if v is None else _plain(v) for v in row])


def write_ladder_csv(path, pairs) -> None:
    """``(n, err)`` pairs, sorted by ``n``, under the header ``n,err``."""
    pairs = sorted((int(n), float(e)) for n, e in pairs)
    if any(a[0] == b[0] for a, b in zip(pairs, pairs[1:])):
        raise ReportError("ladder has repeated n")
    write_table_csv(path, Table("ladder", ["n", "err"], [list(p) for p in pairs]))


def read_ladder_csv(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["n", "err"]:
        raise ReportError(f"{path}: header is not n,err")
    return [(int(n), float(e)) for n, e in rows[1:]]


def _plot_ladder(path, table: Table) -> bool:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cols = [i for i, h in enumerate(table.header) if i > 0 and h.startswith("err")]
    if not cols:
        return False
    n = [row[0] for row in table.rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for i in cols:
        ax.loglog(n, [row[i] for row in table.rows], marker="o", label=table.header[i])
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True


def emit_report(records, out_dir, *, scenario: str, config: dict, seeds: list, tables: Iterable[Table] = (),
                elapsed: Optional[dict] = None, plots: bool = True) -> dict:
    """Write report.json, ``<table>.csv`` and, for n-ladders, ``<table>.svg``; return the report."""
    records = list(records)
    if not records:
        raise ReportError("no records to report")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        names = []
        for t in tables:
            if t.header[:2] == ["n", "err"] and len(t.header) == 2:
                write_ladder_csv(out / f"{t.name}.csv", t.rows)
            else:
                write_table_csv(out / f"{t.name}.csv", t)
            names.append(f"{t.name}.csv")
            if plots and t.header and t.header[0] == "n" and _plot_ladder(out / f"{t.name}.svg", t):
                names.append(f"{t.name}.svg")
        report = build_report(records, scenario=scenario, config=config, seeds=seeds, elapsed=elapsed, artifacts=names)
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ReportError(f"cannot write to {out}: {exc.strerror or exc}") from exc
    return report
