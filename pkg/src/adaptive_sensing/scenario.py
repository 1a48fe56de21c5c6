"""Scripted event density built from rectangular patches, event sampling, and
the three experiment presets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Point, Region


@dataclass(frozen=True)
class Patch:
    """Axis-aligned rectangle ``(x0, y0, x1, y1)`` at ``t_start`` that drifts
    with constant ``velocity`` and emits events while ``t_start <= t <= t_end``."""

    rect: tuple[float, float, float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    t_start: int = 0
    t_end: int = 0
    weight: float = 1.0

    def __post_init__(self):
        x0, y0, x1, y1 = self.rect
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"patch rectangle must have positive area: {self.rect}")
        if self.t_start > self.t_end:
            raise ValueError("patch t_start must not exceed t_end")
        if self.weight < 0:
            raise ValueError("patch weight must be nonnegative")

    def active(self, t: int) -> bool:
        return self.t_start <= t <= self.t_end

    def rect_at(self, t: int) -> tuple[float, float, float, float]:
        dt = t - self.t_start
        vx, vy = self.velocity
        x0, y0, x1, y1 = self.rect
        return (x0 + vx * dt, y0 + vy * dt, x1 + vx * dt, y1 + vy * dt)

    def clipped_rect_at(self, t: int, region: Region):
        """Rectangle at ``t`` intersected with the region, or ``None`` if empty."""
        x0, y0, x1, y1 = self.rect_at(t)
        x0, y0 = max(x0, 0.0), max(y0, 0.0)
        x1, y1 = min(x1, region.width), min(y1, region.height)
        if x1 <= x0 or y1 <= y0:
            return None
        return (x0, y0, x1, y1)


@dataclass(frozen=True)
class ScenarioSpec:
    patches: tuple[Patch, ...]
    total_events: int
    max_t: int
    vis_time: int = 0
    region: Region = field(default_factory=lambda: Region(1000.0, 1000.0))

    def __post_init__(self):
        if self.total_events <= 0 or self.max_t <= 0:
            raise ValueError("total_events and max_t must be positive")
        if self.vis_time < 0:
            raise ValueError("vis_time must be nonnegative")

    def events_at(self, t: int) -> int:
        """Event quota for tick ``t``; spreads a non-integer rate evenly so the
        quotas sum to ``total_events`` over ``[0, max_t)``."""
        return (t + 1) * self.total_events // self.max_t - t * self.total_events // self.max_t

    def first_id(self, t) -> np.ndarray | int:
        """Id of the first event emitted at tick ``t`` (all ticks active)."""
        return np.asarray(t) * self.total_events // self.max_t


@dataclass
class Event:
    id: int
    pos: Point
    occurred_at: int
    visible_until: int
    detected_by: set = field(default_factory=set)
    noticed_by: set = field(default_factory=set)


def density_weight(spec: ScenarioSpec, q, t: int) -> float:
    """Total weight of the active patches covering ``q`` at tick ``t``."""
    total = 0.0
    for patch in spec.patches:
        if not patch.active(t):
            continue
        x0, y0, x1, y1 = patch.rect_at(t)
        if x0 <= q[0] < x1 and y0 <= q[1] < y1:
            total += patch.weight
    return total


def _sample_xy(spec: ScenarioSpec, t: int, rng: np.random.Generator):
    n = spec.events_at(t)
    rects, w = [], []
    for patch in spec.patches:
        if not patch.active(t) or patch.weight == 0:
            continue
        r = patch.clipped_rect_at(t, spec.region)
        if r is None:
            continue
        rects.append(r)
        w.append(patch.weight * (r[2] - r[0]) * (r[3] - r[1]))
    if n == 0 or not rects:
        return np.empty(0), np.empty(0)
    rects = np.asarray(rects)
    if len(rects) == 1:
        pick = np.zeros(n, dtype=np.int64)
    else:
        cum = np.cumsum(w)
        pick = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        pick = np.minimum(pick, len(rects) - 1)
    u = rng.random((n, 2))
    r = rects[pick]
    xs = r[:, 0] + u[:, 0] * (r[:, 2] - r[:, 0])
    ys = r[:, 1] + u[:, 1] * (r[:, 3] - r[:, 1])
    return xs, ys


def sample_events(spec: ScenarioSpec, t: int, rng: np.random.Generator,
                  first_id: Optional[int] = None) -> list[Event]:
    """Events occurring at tick ``t``: a patch is picked with probability
    proportional to weight times clipped area, then a uniform point inside it."""
    if t > spec.max_t:
        raise ValueError(f"tick {t} beyond max_t={spec.max_t}")
    xs, ys = _sample_xy(spec, t, rng)
    base = int(spec.first_id(t)) if first_id is None else first_id
    return [Event(base + k, Point(float(x), float(y)), t, t + spec.vis_time)
            for k, (x, y) in enumerate(zip(xs, ys))]


@dataclass
class EventTable:
    """Columnar store of every event in a run, ids in emission order."""

    x: np.ndarray
    y: np.ndarray
    tick: np.ndarray
    cell: np.ndarray
    start: np.ndarray  # start[t] = first id at tick t; start[max_t] = count

    def __len__(self):
        return len(self.x)

    def span(self, t0: int, t1: int) -> tuple[int, int]:
        """Id range ``[lo, hi)`` of events with tick in ``[t0, t1]`` (clipped)."""
        last = len(self.start) - 1
        t0 = min(max(t0, 0), last)
        t1 = min(max(t1 + 1, 0), last)
        return int(self.start[t0]), int(self.start[t1])


def generate_events(spec: ScenarioSpec, rng: np.random.Generator, grid) -> EventTable:
    """Draw the whole run's events tick by tick (same draws as
    :func:`sample_events`)."""
    xs, ys, ticks = [], [], []
    start = np.zeros(spec.max_t + 1, dtype=np.int64)
    n = 0
    for t in range(spec.max_t):
        start[t] = n
        ex, ey = _sample_xy(spec, t, rng)
        if len(ex):
            xs.append(ex)
            ys.append(ey)
            ticks.append(np.full(len(ex), t, dtype=np.int64))
            n += len(ex)
    start[spec.max_t] = n
    x = np.concatenate(xs) if xs else np.empty(0)
    y = np.concatenate(ys) if ys else np.empty(0)
    tick = np.concatenate(ticks) if ticks else np.empty(0, dtype=np.int64)
    return EventTable(x, y, tick, grid.flat_cells_of(x, y), start)


# -- presets ------------------------------------------------------------------

PRESET_NAMES = ("exp1", "exp2", "exp3")
BEHAVIORS = ("random", "mixed", "gradient")

INF = float("inf")

# per-experiment switch columns: random / mixed / gradient
_SWITCH_TABLE = {
    "exp1": {
        "random": (INF, INF, 1.0, 0),
        "mixed": (0.01, 1e-5, 0.005, 10),
        "gradient": (0.01, 1e-5, 0.0, 0),
    },
    "exp2": {
        "random": (INF, INF, 1.0, 0),
        "mixed": (0.01, 1e-5, 0.0005, 10),
        "gradient": (0.01, 1e-5, 0.0, 0),
    },
    "exp3": {
        "random": (INF, INF, 1.0, 0),
        "mixed": (0.01, 1e-5, 0.01, 10),
        "gradient": (0.01, 1e-5, 0.0, 0),
    },
}

PATCH_SIDE = 200.0


def _scaled(t: float, scale: float) -> int:
    return int(round(t * scale))


def _rain_cloud(max_t: int, t_start: int, side: float, region: Region) -> Patch:
    # starts flush with the left edge, leading edge reaches the right edge at max_t
    y0 = (region.height - side) / 2.0
    speed = (region.width - side) / max_t
    return Patch((0.0, y0, side, y0 + side), (speed, 0.0), t_start, max_t, 1.0)


def preset(name: str, scale: float = 1.0, behavior: str = "mixed"):
    """``(ScenarioSpec, SimParams)`` for one of the three experiments.

    ``scale`` shrinks run length, event total, and every scripted time (patch
    timings, metric window) by the same factor, keeping the per-tick rate.
    """
    from .config import SimParams
    from .agent import SwitchParams
    from .sensing import SensingParams

    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    if behavior not in BEHAVIORS:
        raise ValueError(f"unknown behavior {behavior!r}; choose from {BEHAVIORS}")
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")

    region = Region(1000.0, 1000.0)
    if name in ("exp1", "exp2"):
        max_t = _scaled(90_000, scale)
        patches = [_rain_cloud(max_t, 0, PATCH_SIDE, region)]
        if name == "exp2":
            patches.append(_rain_cloud(max_t, _scaled(10_000, scale), PATCH_SIDE, region))
            total = _scaled(1_650_000, scale)
        else:
            total = _scaled(900_000, scale)
        vis_time, n_agents, still_time, step_size = 0, 30, 10, 30.0
        window = _scaled(900, scale)
    else:
        max_t = _scaled(100_000, scale)
        total = _scaled(750_000, scale)
        half = PATCH_SIDE / 2.0
        centers = [(250.0, 250.0), (750.0, 250.0), (250.0, 750.0), (750.0, 750.0)]
        patches = [
            Patch((cx - half, cy - half, cx + half, cy + half), (0.0, 0.0),
                  _scaled(t0, scale), max_t, float(k + 1))
            for k, ((cx, cy), t0) in enumerate(zip(centers, (0, 25_000, 50_000, 75_000)))
        ]
        vis_time, n_agents, still_time, step_size = 100, 50, 20, 25.0
        window = _scaled(1_000, scale)

    rtog, gtor, prob, first = _SWITCH_TABLE[name][behavior]
    spec = ScenarioSpec(tuple(patches), total, max_t, vis_time, region)
    params = SimParams(
        n_agents=n_agents,
        still_time=still_time,
        step_size=step_size,
        time_window=1_000,
        switch=SwitchParams(rtog, gtor, prob, first),
        sensing=SensingParams(100.0, 200.0),
        delta=10.0,
        metric_window_size=max(window, 1),
    )
    return spec, params
