"""Tabular result files: CSV with a ``#`` metadata block, or JSON.

Undefined values are ``None`` in memory, ``NA`` in CSV and ``null`` in JSON.
Floats are written with ``repr`` so reading a file back reproduces the
in-memory rows exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

NA = "NA"


class OutputError(OSError):
    pass


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


def _clean(v):
    if v is None:
        return None
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return int(v)
    if isinstance(v, float) or hasattr(v, "dtype"):
        v = v.item() if hasattr(v, "item") else v
        if isinstance(v, float) and math.isnan(v):
            return None
        return v
    return v


def normalize(table: Table) -> Table:
    """Convert numpy scalars and NaN so the table compares equal after a round trip."""
    return Table(list(table.columns), [[_clean(v) for v in row] for row in table.rows], table.meta)


def _csv_cell(v) -> str:
    if v is None:
        return NA
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_cell(s: str):
    if s == NA:
        return None
    if s in ("True", "False"):
        return s == "True"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def dumps(table: Table, fmt: str = "csv") -> str:
    table = normalize(table)
    if fmt == "json":
        return json.dumps({"meta": table.meta, "columns": table.columns, "rows": table.rows},
                          indent=1, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    for key in sorted(table.meta):
        buf.write(f"# {key}: {json.dumps(table.meta[key], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def loads(text: str, fmt: str = "csv") -> Table:
    if fmt == "json":
        d = json.loads(text)
        return Table(d["columns"], d["rows"], d["meta"])
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value)
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    return Table(columns, [[_parse_cell(c) for c in row] for row in reader], meta)


def write_table(table: Table, path, fmt: str = "csv") -> Path:
    path = Path(path)
    try:
        path.write_text(dumps(table, fmt))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_table(path, fmt: str | None = None) -> Table:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    return loads(path.read_text(), fmt)
