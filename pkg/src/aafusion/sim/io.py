"""Run outputs: per-step JSON lines and a per-run CSV summary (schema ``rfs-run/1``)."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .experiments import MseRow
from .runner import RunResult, aggregate

SCHEMA = "rfs-run/1"
RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.csv"


def write_run_outputs(results: Sequence[RunResult], out_dir: str | Path) -> tuple[Path, Path]:
    """Write every metrics record and the per-run and overall summaries.

    Output depends only on the results, so equal runs give byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec_path, sum_path = out / RECORDS_FILE, out / SUMMARY_FILE
    with rec_path.open("w", newline="\n") as f:
        for res in results:
            for r in res.records:
                f.write(json.dumps({
                    "schema": SCHEMA, "run": r.run, "step": r.step, "node": r.node, "ospa": r.ospa,
                    "cardinality_estimate": r.cardinality_estimate, "cardinality_truth": r.cardinality_truth,
                    "cardinality_error2": r.cardinality_error2,
                }) + "\n")
    with sum_path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["schema", "run", "node", "mean_ospa", "mean_card_err2"])
        for res in results:
            for node, s in res.summary().items():
                w.writerow([SCHEMA, res.run, node, repr(s["mean_ospa"]), repr(s["mean_card_err2"])])
        for node, s in aggregate(list(results)).items():
            w.writerow([SCHEMA, "all", node, repr(s["mean_ospa"]), repr(s["mean_card_err2"])])
    return rec_path, sum_path


def write_mse_table(rows: Sequence[MseRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["sensors", "analytic_mse", "empirical_mse", "relative_error"])
        for r in rows:
            w.writerow([r.sensors, repr(r.analytic), repr(r.empirical), repr(r.relative_error)])
    return path
