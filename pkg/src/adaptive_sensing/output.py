"""CSV writers for run and aggregate outputs.

Column orders are fixed; floats use ``repr`` (shortest round-trip, ``.``
decimal point, no locale); windows without events are written as ``NA``.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .engine import AggregateResult, RunResult

NA = "NA"

SUMMARY_COLUMNS = ("behavior", "seed", "global_pct", "local_pct")
WINDOW_COLUMNS = ("tick", "window_global_pct", "window_local_pct")
SNAPSHOT_COLUMNS = ("tick", "agent_id", "x", "y", "mode")
AGGREGATE_COLUMNS = ("behavior", "metric", "mean", "ci95_half_width", "replications")
AGG_WINDOW_COLUMNS = ("tick", "global_mean", "global_ci95", "local_mean", "local_ci95")


def _f(x) -> str:
    x = float(x)
    return NA if np.isnan(x) else repr(x)


def _writer(path: Path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_run(run_dir, behavior: str, result: RunResult) -> None:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    fh, w = _writer(run_dir / "summary.csv")
    with fh:
        w.writerow(SUMMARY_COLUMNS)
        w.writerow([behavior, result.seed, _f(result.global_fraction), _f(result.avg_local_fraction)])
    fh, w = _writer(run_dir / "window.csv")
    with fh:
        w.writerow(WINDOW_COLUMNS)
        for t, (g, loc) in enumerate(result.window_series):
            w.writerow([t, _f(g), _f(loc)])
    if result.snapshots:
        fh, w = _writer(run_dir / "snapshots.csv")
        with fh:
            w.writerow(SNAPSHOT_COLUMNS)
            for tick, agent, x, y, mode in result.snapshots:
                w.writerow([tick, agent, _f(x), _f(y), mode])


def write_aggregate(out_dir, rows: list[tuple[str, AggregateResult]]) -> None:
    out_dir = Path(out_dir)
    fh, w = _writer(out_dir / "aggregate.csv")
    with fh:
        w.writerow(AGGREGATE_COLUMNS)
        for behavior, agg in rows:
            for metric in ("global", "local"):
                mean, half = agg.metrics[metric]
                w.writerow([behavior, metric, _f(mean), _f(half), agg.n])
    for behavior, agg in rows:
        fh, w = _writer(out_dir / behavior / "aggregate_window.csv")
        with fh:
            w.writerow(AGG_WINDOW_COLUMNS)
            for t in range(len(agg.window_mean)):
                w.writerow([t, _f(agg.window_mean[t, 0]), _f(agg.window_half[t, 0]),
                            _f(agg.window_mean[t, 1]), _f(agg.window_half[t, 1])])


def read_summary(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        row = next(csv.DictReader(fh))
    return {"behavior": row["behavior"], "seed": int(row["seed"]),
            "global_pct": float(row["global_pct"]), "local_pct": float(row["local_pct"])}
