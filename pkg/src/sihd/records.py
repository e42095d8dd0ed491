"""Column-oriented run records and their CSV form.

File layout::

    # key=value            metadata, one per line
    # created=<ISO time>   excluded from reproducibility comparisons
    t,col1,col2,...        header
    0,1.0000000000000000,...

Floats are written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import TextIO

import numpy as np

__all__ = ["RunRecord", "TIMESTAMP_KEY", "csv_body", "read_csv"]

TIMESTAMP_KEY = "created"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


@dataclass
class RunRecord:
    """Time-indexed series plus the metadata needed to rerun them."""

    columns: dict[str, np.ndarray]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {k: len(v) for k, v in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"columns differ in length: {lengths}")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    def write(self, out: TextIO, timestamp: bool = True) -> None:
        for k, v in self.metadata.items():
            out.write(f"# {k}={v}\n")
        if timestamp:
            now = datetime.now(timezone.utc).isoformat(timespec="seconds")
            out.write(f"# {TIMESTAMP_KEY}={now}\n")
        w = csv.writer(out, lineterminator="\n")
        names = list(self.columns)
        w.writerow(names)
        cols = [self.columns[n] for n in names]
        for i in range(len(self)):
            w.writerow([_fmt(c[i]) for c in cols])

    def to_csv(self, path: str | os.PathLike, timestamp: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            self.write(fh, timestamp=timestamp)

    def to_string(self, timestamp: bool = False) -> str:
        buf = io.StringIO()
        self.write(buf, timestamp=timestamp)
        return buf.getvalue()


def csv_body(text: str) -> str:
    """CSV text with the timestamp metadata line removed."""
    prefix = f"# {TIMESTAMP_KEY}="
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith(prefix))


def read_csv(path: str | os.PathLike) -> RunRecord:
    meta: dict[str, str] = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        key, _, value = line[1:].strip().partition("=")
        meta[key] = value
    reader = csv.reader(lines[body_start:])
    names = next(reader)
    rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    meta.pop(TIMESTAMP_KEY, None)
    return RunRecord({n: data[:, j] for j, n in enumerate(names)}, meta)
