"""Rectangular target region, its square-cell grid, and distance helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np


class Point(NamedTuple):
    x: float
    y: float


class CellIndex(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle with its lower-left corner at the origin."""

    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"region must have positive extent, got {self.width}x{self.height}")

    def contains(self, p) -> bool:
        return 0.0 <= p[0] <= self.width and 0.0 <= p[1] <= self.height

    def clamp(self, x: float, y: float) -> Point:
        return Point(min(max(x, 0.0), self.width), min(max(y, 0.0), self.height))

    def reflect(self, x: float, y: float) -> Point:
        return Point(_reflect(x, self.width), _reflect(y, self.height))


def _reflect(v: float, hi: float) -> float:
    # fold onto [0, 2*hi) then mirror the upper half
    period = 2.0 * hi
    v = math.fmod(v, period)
    if v < 0:
        v += period
    return period - v if v > hi else v


@dataclass(frozen=True)
class Grid:
    """Partition of a region into ``delta`` x ``delta`` cells.

    Cells are left-closed / right-open; points on the region's max edges fold
    into the last column/row. ``n_cols`` and ``n_rows`` are rounded up so the
    grid always covers the region.
    """

    region: Region
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("cell side must be positive")

    @property
    def n_cols(self) -> int:
        return math.ceil(self.region.width / self.delta - 1e-12)

    @property
    def n_rows(self) -> int:
        return math.ceil(self.region.height / self.delta - 1e-12)

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows

    def flat(self, c: CellIndex) -> int:
        """Row-major flat index of a cell."""
        return c.row * self.n_cols + c.col

    def unflat(self, k: int) -> CellIndex:
        row, col = divmod(int(k), self.n_cols)
        return CellIndex(col, row)

    @cached_property
    def centers(self) -> np.ndarray:
        """All cell centers as an ``(n_cells, 2)`` array in row-major order."""
        xs = (np.arange(self.n_cols) + 0.5) * self.delta
        ys = (np.arange(self.n_rows) + 0.5) * self.delta
        cx, cy = np.meshgrid(xs, ys)
        c = np.column_stack([cx.ravel(), cy.ravel()])
        c.flags.writeable = False
        return c

    def flat_cells_of(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorised :func:`cell_of` returning flat indices. No bounds check."""
        cols = np.minimum((np.asarray(xs) / self.delta).astype(np.int64), self.n_cols - 1)
        rows = np.minimum((np.asarray(ys) / self.delta).astype(np.int64), self.n_rows - 1)
        return rows * self.n_cols + cols


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def cell_of(grid: Grid, p) -> CellIndex:
    if not grid.region.contains(p):
        raise ValueError(f"point {tuple(p)} lies outside the region")
    col = min(int(math.floor(p[0] / grid.delta)), grid.n_cols - 1)
    row = min(int(math.floor(p[1] / grid.delta)), grid.n_rows - 1)
    return CellIndex(col, row)


def cell_center(grid: Grid, c: CellIndex) -> Point:
    col, row = c
    if not (0 <= col < grid.n_cols and 0 <= row < grid.n_rows):
        raise ValueError(f"cell {tuple(c)} is not in a {grid.n_cols}x{grid.n_rows} grid")
    return Point((col + 0.5) * grid.delta, (row + 0.5) * grid.delta)


def disc_flat_cells(grid: Grid, cx: float, cy: float, radius: float) -> np.ndarray:
    """Flat indices (ascending, i.e. row-major) of cells whose center is within
    ``radius`` of ``(cx, cy)``."""
    d = grid.delta
    # candidate window padded by one cell; the exact test below decides
    c0 = max(0, math.floor((cx - radius) / d - 0.5))
    c1 = min(grid.n_cols - 1, math.ceil((cx + radius) / d - 0.5))
    r0 = max(0, math.floor((cy - radius) / d - 0.5))
    r1 = min(grid.n_rows - 1, math.ceil((cy + radius) / d - 0.5))
    if c0 > c1 or r0 > r1:
        return np.empty(0, dtype=np.int64)
    cols = np.arange(c0, c1 + 1)
    rows = np.arange(r0, r1 + 1)
    dx = (cols + 0.5) * d - cx
    dy = (rows + 0.5) * d - cy
    inside = np.hypot(dx[None, :], dy[:, None]) <= radius
    rr, cc = np.nonzero(inside)
    return rows[rr] * grid.n_cols + cols[cc]


def cells_in_disc(grid: Grid, center, radius: float) -> list[CellIndex]:
    """Cells whose center lies inside the closed disc, in row-major order.

    Treats each cell as a point mass at its center, the same approximation the
    gradient sum uses.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    return [grid.unflat(k) for k in disc_flat_cells(grid, center[0], center[1], radius)]
