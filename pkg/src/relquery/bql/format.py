"""Result rendering: aligned text, CSV, or JSON rows.

Probability columns print with exactly two decimal places, truncated
toward zero (2/3 renders as 0.66), matching the engine's display
convention for relevance tables.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np

from .evaluate import ResultTable


def _trunc2(value: float) -> str:
    return f"{math.floor(float(value) * 100.0 + 1e-9) / 100.0:.2f}"


def _plain(value, kind):
    if value is None:
        return ""
    if kind == "prob" and value is not None:
        return _trunc2(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if f == int(f) and abs(f) < 1e15:
            return str(int(f))
        return repr(f)
    return str(value)


def _json_value(value, kind):
    if value is None:
        return None
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def format_result(result: ResultTable, mode: str = "table") -> str:
    if mode == "json":
        rows = [
            {col: _json_value(v, k) for col, v, k in zip(result.columns, row, result.kinds)}
            for row in result.rows
        ]
        return json.dumps(rows, ensure_ascii=False)
    if mode == "csv":
        out = io.StringIO()
        import csv as _csv

        writer = _csv.writer(out, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([_plain(v, k) for v, k in zip(row, result.kinds)])
        return out.getvalue().rstrip("\n")
    if mode != "table":
        raise ValueError(f"unknown format mode {mode!r}")
    cells = [[_plain(v, k) for v, k in zip(row, result.kinds)] for row in result.rows]
    widths = [len(c) for c in result.columns]
    for row in cells:
        for i, text in enumerate(row):
            widths[i] = max(widths[i], len(text))
    lines = []
    lines.append(" | ".join(c.ljust(w) for c, w in zip(result.columns, widths)).rstrip())
    lines.append("-+-".join("-" * w for w in widths))
    for row in cells:
        lines.append(" | ".join(t.ljust(w) for t, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
