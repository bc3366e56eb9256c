"""Machine-readable emission: JSON documents and CSV tables."""

import json
import math
import os
import sys
from typing import Any

import pandas as pd
from pydantic import BaseModel

from data.models import SPEC_VERSION, SweepRow

CSV_FLOAT_FORMAT = "%.17g"

SWEEP_COLUMNS = [
    "row_index",
    "l",
    "s",
    "eps",
    "c",
    "mode",
    "n_trials",
    "n_censored",
    "mean_abs_dev",
    "ci_halfwidth_abs_dev",
    "mean_dev",
    "mean_pos_dev",
    "prob_eta_early",
    "mean_tau",
    "lower",
    "lower_best_n",
    "upper",
    "main_term",
    "estimate_c0",
    "estimate_c1",
    "ratio_to_main_term",
    "verdict",
    "error",
]


class OutputError(OSError):
    """A result file could not be written."""


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _jsonable(value.model_dump(mode="json"))
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no inf/nan
        return None
    return value


def document(kind: str, config: dict[str, Any], result: Any) -> dict[str, Any]:
    """Self-describing result: version, resolved configuration, payload."""
    return {"spec_version": SPEC_VERSION, "command": kind, "config": _jsonable(config), "result": _jsonable(result)}


def dumps(doc: dict[str, Any]) -> str:
    # repr-based float output is the shortest string that round-trips
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_json(doc: dict[str, Any], path: str | None = None) -> None:
    """Write to path, or to standard output when path is None."""
    text = dumps(doc)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from e


def write_csv(frame: pd.DataFrame, path: str | None = None) -> None:
    try:
        if path is None:
            frame.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
            return
        _ensure_parent(path)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from e


def sweep_frame(rows: list[SweepRow]) -> pd.DataFrame:
    """One CSV row per grid entry, in grid order."""
    records = []
    for row in rows:
        record: dict[str, Any] = {"row_index": row.row_index, "l": row.l, "s": row.s, "eps": row.eps, "c": row.c, "mode": row.mode.value, "ratio_to_main_term": row.ratio_to_main_term, "error": row.error or ""}
        if row.summary is not None:
            summary, report = row.summary, row.summary.bound_report
            record.update(
                n_trials=summary.n_trials,
                n_censored=summary.n_censored,
                mean_abs_dev=summary.mean_abs_dev,
                ci_halfwidth_abs_dev=summary.ci_halfwidth_abs_dev,
                mean_dev=summary.mean_dev,
                mean_pos_dev=summary.mean_pos_dev,
                prob_eta_early=summary.prob_eta_early,
                mean_tau=summary.mean_tau,
                lower=report.lower,
                lower_best_n=report.lower_best_n,
                upper=report.upper,
                main_term=report.main_term,
                estimate_c0=report.estimate_c0,
                estimate_c1=report.estimate_c1,
                verdict=summary.verdict.value,
            )
        records.append(record)
    frame = pd.DataFrame(records, columns=SWEEP_COLUMNS)
    # Keep integer columns integral even when a failed row leaves gaps
    for column in ("n_trials", "n_censored", "lower_best_n"):
        frame[column] = frame[column].astype("Int64")
    return frame
