"""CSV / markdown emission of benchmark rows."""
from __future__ import annotations

import csv
import io
import math
import os
from typing import Sequence

from .matrix import BenchReportRow

SIG_DIGITS = 4


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return f"{value:.{SIG_DIGITS}g}"
    return str(value)


def _cells(row: BenchReportRow) -> list[str]:
    return [format_value(getattr(row, name)) for name in BenchReportRow.field_names()]


def render_csv(rows: Sequence[BenchReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BenchReportRow.field_names())
    for row in rows:
        w.writerow(_cells(row))
    return buf.getvalue()


def render_markdown(rows: Sequence[BenchReportRow]) -> str:
    names = BenchReportRow.field_names()
    lines = ["| " + " | ".join(names) + " |", "|" + "|".join("---" for _ in names) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(c.replace("|", "\\|") for c in _cells(row)) + " |")
    return "\n".join(lines) + "\n"


def emit_report(rows: Sequence[BenchReportRow], format: str = "csv", path=None) -> str:
    """Render ``rows`` as ``csv`` or ``md`` and write them to ``path`` if given."""
    if not rows:
        raise ValueError("no rows to report")
    fmt = format.lower()
    if fmt == "csv":
        text = render_csv(rows)
    elif fmt in ("md", "markdown"):
        text = render_markdown(rows)
    else:
        raise ValueError(f"unknown report format {format!r}")
    if path is not None:
        with open(os.fspath(path), "w", newline="") as f:
            f.write(text)
    return text


_INT_FIELDS = {"level", "uncompressed_bytes", "compressed_bytes", "file_bytes"}
_FLOAT_FIELDS = {"ratio", "write_mb_s", "read_mb_s", "write_s", "read_s"}


def parse_csv(text: str) -> list[BenchReportRow]:
    """Read rows back from :func:`render_csv` output (numbers at report precision)."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        kwargs = {}
        for name, value in rec.items():
            if name in _INT_FIELDS:
                kwargs[name] = int(value) if value else None
            elif name in _FLOAT_FIELDS:
                kwargs[name] = float(value) if value else None
            else:
                kwargs[name] = value
        rows.append(BenchReportRow(**kwargs))
    return rows
