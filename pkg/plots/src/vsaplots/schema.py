"""CSV readers for the two documented report schemas.

    similarity report:  query,vocab_name,similarity,winner_flag
    SSP sweep:          query,x,similarity

Rows are validated strictly; a mismatch names the offending row.  Empty
files (header only) are valid and render as empty axes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass


class SchemaError(ValueError):
    def __init__(self, path, row_number, message):
        super().__init__(f"{path}: row {row_number}: {message}")
        self.row_number = row_number


BARS_HEADER = ["query", "vocab_name", "similarity", "winner_flag"]
SWEEP_HEADER = ["query", "x", "similarity"]


@dataclass
class BarRow:
    query: str
    vocab_name: str
    similarity: float
    winner: bool


@dataclass
class SweepRow:
    query: str
    x: float
    similarity: float


def _read_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(path, 1, "missing header") from None
        if first != header:
            raise SchemaError(path, 1, f"expected header {','.join(header)!r}, "
                                       f"got {','.join(first)!r}")
        for n, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(path, n, f"expected {len(header)} columns, got {len(row)}")
            yield n, row


def read_bars(path) -> list[BarRow]:
    out = []
    for n, row in _read_rows(path, BARS_HEADER):
        try:
            similarity = float(row[2])
        except ValueError:
            raise SchemaError(path, n, f"similarity {row[2]!r} is not a number") from None
        if row[3] not in ("0", "1"):
            raise SchemaError(path, n, f"winner_flag must be 0 or 1, got {row[3]!r}")
        if not -1.0001 <= similarity <= 1.0001:
            raise SchemaError(path, n, f"similarity {similarity} outside [-1, 1]")
        out.append(BarRow(row[0], row[1], similarity, row[3] == "1"))
    return out


def read_sweep(path) -> list[SweepRow]:
    out = []
    for n, row in _read_rows(path, SWEEP_HEADER):
        try:
            x = float(row[1])
            similarity = float(row[2])
        except ValueError:
            raise SchemaError(path, n, "x and similarity must be numbers") from None
        out.append(SweepRow(row[0], x, similarity))
    return out
