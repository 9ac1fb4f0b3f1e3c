"""CSV / JSON emission of scenario results."""

from __future__ import annotations

import csv
import io
import json
import sys
from typing import IO, Optional, Union
from os import PathLike

from .runner import ScenarioResult

COLUMNS = ("L_m", "scheme", "mean_sum_rate_bpshz", "std_err", "trials", "seed")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def result_rows(result: ScenarioResult) -> list[dict]:
    return [
        {
            "L_m": c.L_m,
            "scheme": c.scheme,
            "mean_sum_rate_bpshz": c.mean_sum_rate_bpshz,
            "std_err": c.std_err,
            "trials": c.trials,
            "seed": result.master_seed,
        }
        for c in result.cells
    ]


def format_results(result: ScenarioResult, fmt: str = "csv") -> str:
    rows = result_rows(result)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([_fmt(r["L_m"]), r["scheme"], _fmt(r["mean_sum_rate_bpshz"]),
                             _fmt(r["std_err"]), r["trials"], r["seed"]])
        return buf.getvalue()
    if fmt == "json":
        doc = {"config_hash": result.config_hash, "seed": result.master_seed, "results": rows}
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}; use csv or json")


def emit_results(result: ScenarioResult, fmt: str = "csv",
                 destination: Optional[Union[str, PathLike, IO[str]]] = None) -> None:
    """Write `result` to a path, an open text stream, or stdout when `destination` is None."""
    text = format_results(result, fmt)
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
