import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptive_sensing.geometry import (CellIndex, Grid, Point, Region, cell_center, cell_of,
                                       cells_in_disc, distance)

coord = st.floats(-1e4, 1e4, allow_nan=False)


@pytest.mark.parametrize("a, b, expected", [
    ((0, 0), (0, 0), 0.0),
    ((0, 0), (3, 4), 5.0),
    ((10, 10), (10, 110), 100.0),
])
def test_distance_examples(a, b, expected):
    assert distance(Point(*a), Point(*b)) == expected


@given(coord, coord, coord, coord, coord, coord)
def test_triangle_inequality(ax, ay, bx, by, cx, cy):
    a, b, c = (ax, ay), (bx, by), (cx, cy)
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9
    assert distance(a, b) == distance(b, a) >= 0


def test_grid_dimensions(grid):
    assert (grid.n_cols, grid.n_rows) == (100, 100)
    odd = Grid(Region(1005.0, 40.0), 10.0)
    assert (odd.n_cols, odd.n_rows) == (101, 4)


@pytest.mark.parametrize("p, expected", [
    ((0, 0), (0, 0)),
    ((999.9, 5), (99, 0)),
    ((10, 10), (1, 1)),
    ((1000, 1000), (99, 99)),
])
def test_cell_of_examples(grid, p, expected):
    assert cell_of(grid, Point(*p)) == CellIndex(*expected)


def test_cell_of_outside(grid):
    with pytest.raises(ValueError):
        cell_of(grid, Point(-0.1, 5))
    with pytest.raises(ValueError):
        cell_of(grid, Point(5, 1000.01))


def test_cell_center_examples(grid):
    assert cell_center(grid, CellIndex(0, 0)) == (5, 5)
    assert cell_center(grid, CellIndex(99, 99)) == (995, 995)
    assert cell_center(Grid(Region(1000, 1000), 25), CellIndex(1, 2)) == (37.5, 62.5)
    with pytest.raises(ValueError):
        cell_center(grid, CellIndex(100, 0))


def test_cell_roundtrip(grid):
    for col in range(grid.n_cols):
        for row in range(0, grid.n_rows, 7):
            c = CellIndex(col, row)
            assert cell_of(grid, cell_center(grid, c)) == c


def test_flat_cells_match_cell_of(grid, rng):
    pts = rng.uniform(0, 1000, (500, 2))
    flat = grid.flat_cells_of(pts[:, 0], pts[:, 1])
    assert [grid.unflat(k) for k in flat] == [cell_of(grid, p) for p in pts]


def brute_disc(grid, center, radius):
    return [CellIndex(col, row) for row in range(grid.n_rows) for col in range(grid.n_cols)
            if math.dist(cell_center(grid, CellIndex(col, row)), center) <= radius]


def test_disc_single_cell(grid):
    assert cells_in_disc(grid, (55.0, 75.0), 2.5) == [CellIndex(5, 7)]


def test_disc_everything(grid):
    assert len(cells_in_disc(grid, (500, 500), 2000.0)) == grid.n_cells


def test_disc_against_full_scan(grid):
    got = cells_in_disc(grid, (500.0, 500.0), 100.0)
    assert got == brute_disc(grid, (500.0, 500.0), 100.0)
    assert len(got) == 316


def test_disc_random_against_full_scan():
    g = Grid(Region(300.0, 200.0), 10.0)
    rng = np.random.default_rng(3)
    for _ in range(100):
        center = (rng.uniform(-50, 350), rng.uniform(-50, 250))
        radius = rng.uniform(0.5, 150)
        assert cells_in_disc(g, center, radius) == brute_disc(g, center, radius)


def test_disc_rejects_bad_radius(grid):
    with pytest.raises(ValueError):
        cells_in_disc(grid, (0, 0), 0.0)


@settings(max_examples=50)
@given(st.floats(0, 1000), st.floats(0, 1000))
def test_region_clamp_and_reflect_stay_inside(x, y):
    r = Region(1000.0, 1000.0)
    for dx in (-2500.0, -30.0, 0.0, 30.0, 2500.0):
        assert r.contains(r.clamp(x + dx, y - dx))
        assert r.contains(r.reflect(x + dx, y - dx))
