"""CSV and JSON artifacts.

Floats are written with ``repr`` (shortest round-trip decimal) so a rerun
with the same seed reproduces the CSV files byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from ..errors import ArtifactWriteError
from .harness import BenchRow, StateRow

STATE_COLUMNS = ("p2", "M", "trace_distance", "expectation")
MSE_COLUMNS = ("estimator", "N", "mse_mean", "mse_stderr", "bias_sq", "n_failures")


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as e:
        raise ArtifactWriteError(path, e.strerror or str(e)) from e


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def emit_reports(
    out_dir,
    states: list[StateRow] | None = None,
    mse: list[BenchRow] | None = None,
    summary: dict | None = None,
) -> dict[str, Path]:
    """Write whichever of states.csv, mse.csv and summary.json are supplied."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ArtifactWriteError(out, e.strerror or str(e)) from e
    written = {}
    if states is not None:
        path = out / "states.csv"
        _write_csv(path, STATE_COLUMNS, [(r.p2, r.M, r.trace_distance, r.expectation) for r in states])
        written["states"] = path
    if mse is not None:
        path = out / "mse.csv"
        rows = [(r.estimator, r.N, r.mse_mean, r.mse_stderr, r.bias_sq, r.n_failures) for r in mse]
        _write_csv(path, MSE_COLUMNS, rows)
        written["mse"] = path
    if summary is not None:
        path = out / "summary.json"
        try:
            path.write_text(json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise ArtifactWriteError(path, e.strerror or str(e)) from e
        written["summary"] = path
    return written


def read_mse_csv(path) -> list[dict]:
    """Rows of mse.csv with numeric fields parsed."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for r in csv.DictReader(fh):
            rows.append(
                {
                    "estimator": r["estimator"],
                    "N": float(r["N"]),
                    "mse_mean": float(r["mse_mean"]),
                    "mse_stderr": float(r["mse_stderr"]),
                    "bias_sq": float(r["bias_sq"]),
                    "n_failures": int(r["n_failures"]),
                }
            )
    return rows
