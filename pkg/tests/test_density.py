import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptive_sensing.density import (DensityEstimate, GradientVector, discrete_objective,
                                      estimate_density, gradient, gradient_from_counts,
                                      gradient_magnitude, gradient_xy, normalize_counts)
from adaptive_sensing.geometry import CellIndex, Grid, Point, Region, cell_center
from adaptive_sensing.sensing import SensingParams, joint_detection_prob

P = SensingParams(100.0, 200.0)
SMALL = Grid(Region(200.0, 200.0), 10.0)


def density_from(grid, values):
    return DensityEstimate(grid, np.asarray(values, dtype=float).ravel(), 0)


def test_estimate_empty(grid):
    est = estimate_density([], 50, 1000, grid)
    assert not est.values.any()


def test_estimate_max_normalised(grid):
    a, b = Point(15, 15), Point(505, 705)
    events = [(a, 10)] * 4 + [(b, 10)] * 2
    est = estimate_density(events, 20, 100, grid)
    assert est.at(1, 1) == 1.0
    assert est.at(50, 70) == 0.5
    assert np.count_nonzero(est.values) == 2


def test_estimate_window_closed_at_both_ends(grid):
    p = Point(100, 100)
    assert estimate_density([(p, 900)], 1900, 1000, grid).values.max() == 1.0
    assert estimate_density([(p, 1900)], 1900, 1000, grid).values.max() == 1.0
    assert estimate_density([(p, 899)], 1900, 1000, grid).values.max() == 0.0


def test_estimate_rejects_outside(grid):
    with pytest.raises(ValueError):
        estimate_density([(Point(1200, 5), 0)], 0, 10, grid)
    with pytest.raises(ValueError):
        estimate_density([], 0, 0, grid)


def test_estimate_ignores_stale_and_is_idempotent(grid, rng):
    events = [(Point(*rng.uniform(0, 1000, 2)), int(rng.integers(500, 1500))) for _ in range(300)]
    a = estimate_density(events, 1500, 1000, grid)
    b = estimate_density(events + [(Point(3, 3), 499)], 1500, 1000, grid)
    c = estimate_density(events, 1500, 1000, grid)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.values, c.values)
    assert a.values.max() == 1.0 and a.values.min() >= 0.0


# -- objective ------------------------------------------------------------------

def brute_objective(positions, values, grid):
    total = 0.0
    for row in range(grid.n_rows):
        for col in range(grid.n_cols):
            v = values[row * grid.n_cols + col]
            if v:
                q = cell_center(grid, CellIndex(col, row))
                total += v * joint_detection_prob(positions, q, P)
    return total


def test_objective_examples():
    zero = density_from(SMALL, np.zeros(SMALL.n_cells))
    assert discrete_objective([(50, 50)], zero, P) == 0.0
    one = np.zeros(SMALL.n_cells)
    one[SMALL.flat(CellIndex(3, 4))] = 1.0
    assert discrete_objective([(35, 45)], density_from(SMALL, one), P) == 1.0


def test_objective_against_resummation(rng):
    values = normalize_counts(rng.integers(0, 9, SMALL.n_cells))
    agents = rng.uniform(0, 200, (5, 2))
    est = density_from(SMALL, values)
    assert discrete_objective(agents, est, P) == pytest.approx(brute_objective(agents, values, SMALL), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_objective_bounds_and_monotone(seed):
    r = np.random.default_rng(seed)
    values = r.random(SMALL.n_cells) * (r.random(SMALL.n_cells) < 0.5)
    est = density_from(SMALL, values)
    agents = r.uniform(0, 200, (int(r.integers(0, 6)), 2))
    f = discrete_objective(agents, est, P)
    assert 0.0 <= f <= values.sum() + 1e-12
    more = np.vstack([agents, r.uniform(0, 200, (1, 2))])
    assert discrete_objective(more, est, P) >= f - 1e-12


# -- gradient -------------------------------------------------------------------

def central_difference(self_pos, others, est, h=1e-4):
    def f(x, y):
        return discrete_objective(np.vstack([[x, y], others]) if len(others) else [[x, y]], est, P)
    x, y = self_pos
    return ((f(x + h, y) - f(x - h, y)) / (2 * h), (f(x, y + h) - f(x, y - h)) / (2 * h))


def random_config(r, n_neighbors, grid=SMALL):
    values = normalize_counts(r.integers(0, 10, grid.n_cells))
    self_pos = r.uniform(0, grid.region.width, 2)
    others = r.uniform(0, grid.region.width, (n_neighbors, 2))
    return self_pos, others, density_from(grid, values)


def too_close(grid, p, limit=1.0):
    return np.min(np.hypot(*(grid.centers - p).T)) < limit


def rel_error(g, fd):
    return math.hypot(g[0] - fd[0], g[1] - fd[1]) / math.hypot(*fd)


def test_gradient_matches_finite_differences():
    r = np.random.default_rng(77)
    checked = 0
    while checked < 40:
        self_pos, others, est = random_config(r, 3)
        if too_close(SMALL, self_pos):
            continue
        g = gradient(self_pos, others, est, P)
        assert rel_error(g, central_difference(self_pos, others, est)) <= 1e-5
        checked += 1


def test_gradient_zero_density():
    est = density_from(SMALL, np.zeros(SMALL.n_cells))
    assert gradient((100, 100), [(120, 90)], est, P) == (0.0, 0.0)


def test_gradient_symmetric_ring_cancels_in_x(grid):
    values = np.zeros(grid.n_cells)
    for dcol in (-4, 4):
        for drow in (-2, 0, 3):
            values[grid.flat(CellIndex(50 + dcol, 50 + drow))] = 1.0
    g = gradient((505.0, 505.0), [], density_from(grid, values), P)
    assert abs(g.gx) <= 1e-15
    assert g.gy != 0.0


def test_gradient_points_toward_density(grid):
    values = np.zeros(grid.n_cells)
    values[grid.flat(CellIndex(55, 50))] = 1.0
    g = gradient((505.0, 505.0), [], density_from(grid, values), P)
    assert g.gx > 0 and abs(g.gy) < 1e-15


def test_far_neighbor_is_ignored():
    r = np.random.default_rng(8)
    for _ in range(20):
        self_pos, others, est = random_config(r, 3, Grid(Region(1000.0, 1000.0), 10.0))
        angle = r.uniform(0, 2 * math.pi)
        far = self_pos + (200.0 + r.uniform(1e-6, 300)) * np.array([math.cos(angle), math.sin(angle)])
        assert gradient(self_pos, others, est, P) == gradient(self_pos, np.vstack([others, far]), est, P)


def test_singular_cell_contributes_nothing(grid):
    values = np.zeros(grid.n_cells)
    values[grid.flat(CellIndex(50, 50))] = 1.0
    assert gradient((505.0, 505.0), [], density_from(grid, values), P) == (0.0, 0.0)


def test_compiled_kernel_agrees_with_reference(grid):
    r = np.random.default_rng(99)
    for _ in range(50):
        counts = r.integers(0, 6, grid.n_cells) * (r.random(grid.n_cells) < 0.3)
        s = r.uniform(0, 1000, 2)
        nbrs = s + r.uniform(-200, 200, (int(r.integers(0, 15)), 2))
        ref = gradient_xy(s[0], s[1], nbrs, normalize_counts(counts), grid, 100.0)
        fast = gradient_from_counts(s[0], s[1], nbrs, counts, counts.max(), grid, 100.0)
        np.testing.assert_allclose(fast, ref, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("g, expected", [((0, 0), 0), ((3, 4), 5), ((-0.01, 0), 0.01)])
def test_gradient_magnitude(g, expected):
    assert gradient_magnitude(GradientVector(*g)) == expected
