"""LMP-versus-load step curves.

A table row ``(load, price)`` says the price is ``price`` from ``load`` up to
the next row. The last row only marks the maximal load and must repeat the
price of the row before it.
"""

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .exceptions import InputError

LOAD_COLUMN = "load_mw"


@dataclass(frozen=True)
class LmpTable:
    """One bus column of an LMP table, as read."""

    bus_id: str
    boundaries: tuple
    prices: tuple

    def __post_init__(self):
        if len(self.boundaries) != len(self.prices):
            raise InputError("boundaries and prices differ in length", "prices")
        if len(self.boundaries) < 2:
            raise InputError(
                f"bus {self.bus_id}: need at least 2 rows, got {len(self.boundaries)}",
                "boundaries")
        if self.boundaries[0] != 0:
            raise InputError(
                f"bus {self.bus_id}: first load must be 0, got {self.boundaries[0]}",
                LOAD_COLUMN)
        for lo, hi in zip(self.boundaries, self.boundaries[1:]):
            if not hi > lo:
                raise InputError(
                    f"bus {self.bus_id}: load column not strictly increasing at {hi}",
                    LOAD_COLUMN)
        for p in self.prices:
            if not p > 0:
                raise InputError(f"bus {self.bus_id}: non-positive price {p}", self.bus_id)


def _number(cell, row, column):
    try:
        value = Decimal(cell.strip())
    except InvalidOperation:
        raise InputError(
            f"row {row}, column {column!r}: non-numeric cell {cell!r}", column) from None
    if not value.is_finite():
        raise InputError(f"row {row}, column {column!r}: non-finite cell {cell!r}", column)
    return float(value)


def parse_table(source):
    """Parse CSV text into one :class:`LmpTable` per price column.

    The first column holds the loads in MW and every further column one
    bus, headed by its id.
    """
    reader = csv.reader(io.StringIO(source))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError("empty LMP table", LOAD_COLUMN)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise InputError("LMP table needs a load column and at least one bus column",
                         LOAD_COLUMN)
    if len(set(header)) != len(header):
        raise InputError(f"duplicate column names in header {header}", LOAD_COLUMN)
    body = rows[1:]
    columns = [[] for _ in header]
    for n, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise InputError(f"row {n}: expected {len(header)} cells, got {len(row)}",
                             LOAD_COLUMN)
        for k, cell in enumerate(row):
            columns[k].append(_number(cell, n, header[k]))
    loads = tuple(columns[0])
    return [LmpTable(bus, loads, tuple(col)) for bus, col in zip(header[1:], columns[1:])]


def read_tables(path):
    """Read every bus table from a CSV file, keyed by bus id.

    ``path`` may be a filesystem path or a package resource.
    """
    text = path.read_text() if hasattr(path, "read_text") else Path(path).read_text()
    return {t.bus_id: t for t in parse_table(text)}


@dataclass(frozen=True, eq=False)
class LmpCurve:
    """Step function from load to price with grouped price levels.

    ``edges`` has one more entry than ``interval_prices``; interval ``k``
    is ``[edges[k], edges[k+1])`` and the last one is closed at ``d_max``.
    ``interval_level[k]`` is the level index of interval ``k``. Levels are
    numbered in order of first appearance along the load axis.
    """

    bus_id: str
    edges: np.ndarray
    interval_prices: np.ndarray
    interval_level: np.ndarray
    prices: np.ndarray

    @property
    def d_max(self):
        return float(self.edges[-1])

    @property
    def n_levels(self):
        return len(self.prices)

    @property
    def intervals(self):
        """``(lo, hi, price)`` triples along the load axis."""
        return [(float(lo), float(hi), float(p)) for lo, hi, p
                in zip(self.edges[:-1], self.edges[1:], self.interval_prices)]

    def pieces(self, level):
        """Connected pieces ``(lo, hi)`` of a level's region, adjacent intervals merged."""
        out = []
        for k in np.flatnonzero(self.interval_level == level):
            lo, hi = float(self.edges[k]), float(self.edges[k + 1])
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
        return out

    @property
    def region_lengths(self):
        widths = np.diff(self.edges)
        return np.bincount(self.interval_level, weights=widths, minlength=self.n_levels)

    @property
    def level_weights(self):
        """Fraction of ``[0, d_max]`` covered by each level."""
        return self.region_lengths / self.d_max

    def level_of_load(self, load):
        """Vectorised :func:`price_of_load` without range checks."""
        k = np.searchsorted(self.edges, load, side="right") - 1
        k = np.clip(k, 0, len(self.interval_prices) - 1)
        return self.interval_level[k]

    def to_table(self):
        """Dump back to an :class:`LmpTable`, terminator row included."""
        prices = tuple(float(p) for p in self.interval_prices)
        return LmpTable(self.bus_id, tuple(float(e) for e in self.edges),
                        prices + (prices[-1],))


def build_curve(table):
    """Group a table's intervals into price levels."""
    *rows, last = table.prices
    if last != rows[-1]:
        raise InputError(
            f"bus {table.bus_id}: final row price {last} differs from the previous "
            f"row's {rows[-1]}; the final row must only mark the maximal load",
            table.bus_id)
    edges = np.asarray(table.boundaries, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise InputError(f"bus {table.bus_id}: zero-length interval", LOAD_COLUMN)
    # table constants: float equality of parsed cells is decimal equality
    levels = []
    interval_level = []
    for p in rows:
        if p not in levels:
            levels.append(p)
        interval_level.append(levels.index(p))
    return LmpCurve(
        bus_id=table.bus_id,
        edges=edges,
        interval_prices=np.asarray(rows, dtype=float),
        interval_level=np.asarray(interval_level, dtype=np.intp),
        prices=np.asarray(levels, dtype=float),
    )


def price_of_load(curve, load):
    """Index of the price level whose region contains ``load``.

    Boundary loads belong to the interval they open, except ``d_max``
    which closes the last interval.
    """
    if not 0 <= load <= curve.d_max:
        raise InputError(f"load {load} outside [0, {curve.d_max}]", "load")
    return int(curve.level_of_load(load))


def load_curves(path, buses=None):
    """Read a CSV file and build curves for ``buses`` (all when ``None``)."""
    tables = read_tables(path)
    if buses is None:
        buses = list(tables)
    curves = []
    for bus in buses:
        if bus not in tables:
            raise InputError(f"unknown bus {bus!r}; file has {sorted(tables)}", "bus")
        curves.append(build_curve(tables[bus]))
    return curves
