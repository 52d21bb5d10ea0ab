"""On-disk formats.

State file: one JSON header line ``{"p", "N", "M", "d", "label", "h"}``,
then CSV with columns ``cell_digits,re,im``.  ``cell_digits`` lists the
digits at positions ``-N .. M-1`` space separated, axes joined by ``;``.

Spike CSV: header ``neuron_index,window_index,count``.

Config file: ``key = value`` per line, ``#`` comments.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .grid import Cell, GridSpec, StateVector, cells
from .padic import BaseConfig


class FormatError(ValueError):
    """Malformed input; ``line`` is the 1-based line number when known."""

    def __init__(self, msg, line=None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


def _cell_digits(c: Cell) -> str:
    return ";".join(" ".join(str(d) for d in ax) for ax in c.digits())


def dumps_state(phi: StateVector) -> str:
    g = phi.grid
    header = {"p": g.p, "N": g.N, "M": g.M, "d": g.d, "label": phi.label, "h": phi.h}
    buf = io.StringIO()
    buf.write(json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell_digits", "re", "im"])
    for c, z in zip(cells(g), phi.coeffs):
        w.writerow([_cell_digits(c), repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def loads_state(text: str, max_cells: int | None = None) -> StateVector:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty state file")
    try:
        hdr = json.loads(lines[0])
        kw = {} if max_cells is None else {"max_cells": max_cells}
        grid = GridSpec(BaseConfig(int(hdr["p"])), int(hdr["N"]), int(hdr["M"]),
                        int(hdr.get("d", 1)), **kw)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FormatError(f"bad header: {exc}", 1) from None
    rows = list(csv.reader(lines[1:]))
    if not rows or rows[0] != ["cell_digits", "re", "im"]:
        raise FormatError("expected column header cell_digits,re,im", 2)
    index = {_cell_digits(c): c.index for c in cells(grid)}
    coeffs = np.full(grid.size, np.nan, dtype=complex)
    for k, row in enumerate(rows[1:], start=3):
        if len(row) != 3:
            raise FormatError(f"expected 3 fields, got {len(row)}", k)
        if row[0] not in index:
            raise FormatError(f"unknown cell {row[0]!r}", k)
        try:
            coeffs[index[row[0]]] = complex(float(row[1]), float(row[2]))
        except ValueError:
            raise FormatError("non-numeric amplitude", k) from None
    if np.isnan(coeffs.real).any():
        raise FormatError("state file does not cover every cell")
    return StateVector(grid, coeffs, label=hdr.get("label", ""), h=hdr.get("h"))


def write_state(path, phi: StateVector):
    with open(path, "w", newline="") as fh:
        fh.write(dumps_state(phi))


def read_state(path, max_cells: int | None = None) -> StateVector:
    with open(path) as fh:
        return loads_state(fh.read(), max_cells)


@dataclass(frozen=True)
class SpikeRow:
    line: int
    neuron: int
    window: int
    count: int


def read_spikes(path) -> list:
    with open(path, newline="") as fh:
        return parse_spikes(fh.read())


def parse_spikes(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["neuron_index", "window_index", "count"]:
        raise FormatError("expected header neuron_index,window_index,count", 1)
    out = []
    seen = set()
    for k, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise FormatError(f"expected 3 fields, got {len(row)}", k)
        try:
            neuron, window, count = (int(c) for c in row)
        except ValueError:
            raise FormatError(f"non-integer field in {row!r}", k) from None
        if neuron < 0 or window < 0 or count < 0:
            raise FormatError("indices and counts must be nonnegative", k)
        if (neuron, window) in seen:
            raise FormatError(f"duplicate entry for neuron {neuron}, window {window}", k)
        seen.add((neuron, window))
        out.append(SpikeRow(k, neuron, window, count))
    if not out:
        raise FormatError("no spike rows")
    return out


def spike_windows(rows) -> dict:
    """``{window_index: [count of neuron 0, 1, ...]}``; absent entries are 0."""
    width = max(r.neuron for r in rows) + 1
    table = defaultdict(lambda: [0] * width)
    for r in rows:
        table[r.window][r.neuron] = r.count
    return {w: table[w] for w in sorted(table)}


def read_config(path) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def parse_config(text: str) -> dict:
    out = {}
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected key = value, got {raw!r}", k)
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError("empty key", k)
        out[key.replace("-", "_")] = val
    return out
