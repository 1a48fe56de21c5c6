"""Per-agent event-density estimate on the grid, the cell-sum objective, and
its analytic gradient with respect to one agent's coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .geometry import Grid, disc_flat_cells
from .sensing import SensingParams

# cells closer than this to the agent are dropped from the gradient sum
SINGULAR_EPS = 1e-9


@dataclass(frozen=True)
class DensityEstimate:
    grid: Grid
    values: np.ndarray  # flat, row-major, one entry per cell
    built_at: int

    def at(self, col: int, row: int) -> float:
        return float(self.values[row * self.grid.n_cols + col])


class GradientVector(NamedTuple):
    gx: float
    gy: float


def normalize_counts(counts: np.ndarray) -> np.ndarray:
    """Scale per-cell counts so the busiest cell is 1 (all zeros stay zero)."""
    top = counts.max() if counts.size else 0
    if top <= 0:
        return np.zeros(counts.shape, dtype=float)
    return counts / float(top)


def estimate_density(known_events, now: int, time_window: int, grid: Grid) -> DensityEstimate:
    """Histogram of events that occurred in ``[now - time_window, now]``,
    max-normalised to 1.

    ``known_events`` is an iterable of ``(point, tick)`` pairs.
    """
    if not time_window > 0:
        raise ValueError("time window must be positive")
    xs, ys = [], []
    for p, tick in known_events:
        if not grid.region.contains(p):
            raise ValueError(f"event at {tuple(p)} lies outside the region")
        if now - time_window <= tick <= now:
            xs.append(p[0])
            ys.append(p[1])
    counts = np.bincount(grid.flat_cells_of(np.array(xs), np.array(ys)), minlength=grid.n_cells) \
        if xs else np.zeros(grid.n_cells, dtype=np.int64)
    return DensityEstimate(grid, normalize_counts(counts), now)


def _miss_product(qx, qy, neighbors: np.ndarray, r_s: float) -> np.ndarray:
    """prod_k (1 - p_k(q)) for each query point over the given agents."""
    if len(neighbors) == 0:
        return np.ones(len(qx))
    d = np.hypot(qx[:, None] - neighbors[None, :, 0], qy[:, None] - neighbors[None, :, 1])
    p = np.where(d <= r_s, (1.0 - d / r_s) ** 2, 0.0)
    return np.prod(1.0 - p, axis=1)


def discrete_objective(positions, density: DensityEstimate, params: SensingParams) -> float:
    """Sum over cells of density times joint detection probability at the cell
    center. The constant integral of the density is left out."""
    vals = density.values
    live = np.flatnonzero(vals)
    if live.size == 0:
        return 0.0
    c = density.grid.centers[live]
    agents = np.asarray(positions, dtype=float).reshape(-1, 2)
    joint = 1.0 - _miss_product(c[:, 0], c[:, 1], agents, params.r_s)
    return float(np.dot(vals[live], joint))


def gradient_xy(sx: float, sy: float, neighbors: np.ndarray, values: np.ndarray,
                grid: Grid, r_s: float) -> tuple[float, float]:
    """Array-level gradient; ``neighbors`` is an ``(k, 2)`` array already
    restricted to agents within ``2 * r_s``."""
    cells = disc_flat_cells(grid, sx, sy, r_s)
    if cells.size == 0:
        return 0.0, 0.0
    phi = values[cells]
    keep = phi != 0.0
    if not keep.any():
        return 0.0, 0.0
    cells, phi = cells[keep], phi[keep]
    c = grid.centers[cells]
    dx = sx - c[:, 0]
    dy = sy - c[:, 1]
    d = np.hypot(dx, dy)
    far = d >= SINGULAR_EPS
    if not far.all():
        dx, dy, d, phi, c = dx[far], dy[far], d[far], phi[far], c[far]
    w = phi * _miss_product(c[:, 0], c[:, 1], neighbors, r_s) * (2.0 / r_s) * (1.0 / r_s - 1.0 / d)
    return float(np.dot(w, dx)), float(np.dot(w, dy))


def neighbors_within(self_pos, positions, reach: float) -> np.ndarray:
    arr = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(arr) == 0:
        return arr
    d = np.hypot(arr[:, 0] - self_pos[0], arr[:, 1] - self_pos[1])
    return arr[d <= reach]


def gradient(self_pos, neighbor_positions, density: DensityEstimate,
             params: SensingParams) -> GradientVector:
    """Gradient of :func:`discrete_objective` with respect to ``self_pos``.

    Neighbors farther than ``2 * r_s`` cannot overlap the agent's sensing disc
    and are ignored.
    """
    nbrs = neighbors_within(self_pos, neighbor_positions, 2.0 * params.r_s)
    gx, gy = gradient_xy(float(self_pos[0]), float(self_pos[1]), nbrs, density.values,
                         density.grid, params.r_s)
    return GradientVector(gx, gy)


def gradient_magnitude(g) -> float:
    return math.hypot(g[0], g[1])


@numba.njit(cache=True)
def _gradient_kernel(sx, sy, counts, n_cols, n_rows, delta, r_s, nbrs):  # pragma: no cover
    c0 = max(0, int(math.floor((sx - r_s) / delta - 0.5)))
    c1 = min(n_cols - 1, int(math.ceil((sx + r_s) / delta - 0.5)))
    r0 = max(0, int(math.floor((sy - r_s) / delta - 0.5)))
    r1 = min(n_rows - 1, int(math.ceil((sy + r_s) / delta - 0.5)))
    gx = 0.0
    gy = 0.0
    k = nbrs.shape[0]
    r2 = r_s * r_s
    for row in range(r0, r1 + 1):
        qy = (row + 0.5) * delta
        base = row * n_cols
        for col in range(c0, c1 + 1):
            phi = counts[base + col]
            if phi == 0:
                continue
            qx = (col + 0.5) * delta
            dx = sx - qx
            dy = sy - qy
            d2 = dx * dx + dy * dy
            if d2 > r2:
                continue
            d = math.sqrt(d2)
            if d < SINGULAR_EPS:
                continue
            miss = 1.0
            for j in range(k):
                ex = qx - nbrs[j, 0]
                ey = qy - nbrs[j, 1]
                e2 = ex * ex + ey * ey
                if e2 <= r2:
                    u = 1.0 - math.sqrt(e2) / r_s
                    miss *= 1.0 - u * u
            w = phi * miss * (2.0 / r_s) * (1.0 / r_s - 1.0 / d)
            gx += w * dx
            gy += w * dy
    return gx, gy


def gradient_from_counts(sx: float, sy: float, neighbors: np.ndarray, counts: np.ndarray,
                         top: float, grid: Grid, r_s: float) -> tuple[float, float]:
    """Compiled equivalent of :func:`gradient_xy` on raw cell counts; the
    result is divided by ``top`` (the max count) since the sum is linear in
    the density."""
    top = float(top)
    if top <= 0:
        return 0.0, 0.0
    gx, gy = _gradient_kernel(sx, sy, counts, grid.n_cols, grid.n_rows, grid.delta, r_s,
                              np.ascontiguousarray(neighbors, dtype=np.float64).reshape(-1, 2))
    return float(gx) / top, float(gy) / top
