"""Flat tabular output shared by the sweep and evolution front ends."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


def fmt(x) -> str:
    """17 significant digits; ``None`` and NaN become an empty field."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.17g}"


def _json_value(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    x = float(x)
    if math.isnan(x):
        return None
    # repr of a float is the shortest exact round-trip form
    return x if math.isfinite(x) else None


@dataclass
class SweepTable:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def append(self, row) -> None:
        row = tuple(row)
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        records = [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]
        return json.dumps(records, indent=1) + "\n"

    def write(self, path, format: str = "csv") -> Path:
        path = Path(path)
        text = self.to_csv() if format == "csv" else self.to_json()
        # newline="" keeps LF endings on every platform
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return path
