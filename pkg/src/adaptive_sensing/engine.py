"""Deterministic tick loop, metric accounting, and replication aggregation.

Detection rule: each (agent, event) pair gets one Bernoulli trial when the
event occurs, plus one more after each of that agent's moves while the
event's footprint is still visible. A stationary agent is never re-rolled.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import comms
from .agent import (AgentState, AgentView, ExecutionMode, apply_mode, build_message,
                    decide_mode, integrate_message, next_position)
from .config import SimParams
from .density import gradient_from_counts, normalize_counts
from .geometry import Grid, Point
from .scenario import EventTable, ScenarioSpec, generate_events

log = logging.getLogger(__name__)

Z95 = 1.96


class InvariantError(AssertionError):
    pass


@dataclass
class RunResult:
    global_fraction: float
    avg_local_fraction: float
    window_series: np.ndarray  # (max_t, 2) window global/local %, NaN = no events
    n_events: int
    seed: int = 0
    gradient_mode_ticks: int = 0
    snapshots: list = field(default_factory=list)  # (tick, id, x, y, mode)


@dataclass
class AggregateResult:
    n: int
    metrics: dict  # name -> (mean, ci half-width)
    window_mean: np.ndarray  # (max_t, 2)
    window_half: np.ndarray  # (max_t, 2)


def seed_streams(seed: int, n_agents: int):
    """Split one replication seed into independent generators.

    Returns ``(events, sensing, placement, [agent_0, ...])``. The event stream
    depends only on ``seed`` so every behavior sees the same events.
    """
    root = np.random.SeedSequence(seed)
    ev, sense, place, agents = root.spawn(4)
    return (np.random.default_rng(ev), np.random.default_rng(sense),
            np.random.default_rng(place), [np.random.default_rng(s) for s in agents.spawn(n_agents)])


class World:
    """Full state of one replication."""

    def __init__(self, params: SimParams, spec: ScenarioSpec, seed: int,
                 check: bool = False, events: Optional[EventTable] = None,
                 initial_positions=None):
        self.params = params
        self.spec = spec
        self.seed = seed
        self.check = check
        self.region = spec.region
        self.grid = Grid(spec.region, params.delta)
        ev_rng, self.sense_rng, place_rng, self.agent_rngs = seed_streams(seed, params.n_agents)
        self.events = events if events is not None else generate_events(spec, ev_rng, self.grid)

        n, e = params.n_agents, len(self.events)
        self.detected = np.zeros((n, e), dtype=bool)
        self.noticed = np.zeros((n, e), dtype=bool)
        self.pos = np.column_stack([place_rng.uniform(0, self.region.width, n),
                                    place_rng.uniform(0, self.region.height, n)])
        if initial_positions is not None:
            self.pos = np.array(initial_positions, dtype=float).reshape(n, 2)
        if params.phase_offsets:
            phase = place_rng.integers(0, params.still_time, n)
        else:
            phase = np.zeros(n, dtype=np.int64)
        self.agents = [
            AgentState(i, Point(float(self.pos[i, 0]), float(self.pos[i, 1])),
                       AgentView(i, self.noticed[i]), next_move_tick=int(phase[i]))
            for i in range(n)
        ]
        self.next_move = phase.astype(np.int64)
        # per-agent event counts per cell over [t - time_window, t]
        self.counts = np.zeros((n, self.grid.n_cells), dtype=np.int64)
        # adjacency of the communication graph as int bitmasks, kept current
        self._links = [0] * n
        for i in range(n):
            self._relink(i)
        self.t = 0
        self.n_gradient = 0
        self.gradient_mode_ticks = 0
        if check:
            self.attempts = np.zeros((n, e), dtype=np.uint16)
            self.gradient_reports: dict[tuple[int, int], Point] = {}

    # -- bookkeeping ----------------------------------------------------------

    def _relink(self, i: int) -> None:
        x, y = self.pos[i]
        near = np.hypot(self.pos[:, 0] - x, self.pos[:, 1] - y) <= self.params.sensing.r_c
        bits = 0
        links = self._links
        bit_i = 1 << i
        for j, linked in enumerate(near.tolist()):
            if linked:
                bits |= 1 << j
                links[j] |= bit_i
            else:
                links[j] &= ~bit_i
        links[i] = bits

    def component(self, i: int) -> list[int]:
        """Ascending ids of agents reachable from ``i`` (excluding ``i``)."""
        links = self._links
        comp = frontier = 1 << i
        while frontier:
            grow = 0
            while frontier:
                low = frontier & -frontier
                grow |= links[low.bit_length() - 1]
                frontier ^= low
            frontier = grow & ~comp
            comp |= grow
        comp &= ~(1 << i)
        out = []
        while comp:
            low = comp & -comp
            out.append(low.bit_length() - 1)
            comp ^= low
        return out

    def _count_new(self, agents, ids: np.ndarray, t: int) -> None:
        """Add events about to become known to the agents' window counts."""
        if len(ids) == 0 or len(agents) == 0:
            return
        ids = ids[self.events.tick[ids] >= t - self.params.time_window]
        if len(ids) == 0:
            return
        agents = np.asarray(agents)
        fresh = ~self.noticed[np.ix_(agents, ids)]
        rows, cols = np.nonzero(fresh)
        if rows.size:
            np.add.at(self.counts, (agents[rows], self.events.cell[ids[cols]]), 1)

    def _expire(self, t: int) -> None:
        old = t - self.params.time_window - 1
        if old < 0:
            return
        lo, hi = int(self.events.start[old]), int(self.events.start[old + 1])
        if hi <= lo:
            return
        rows, cols = np.nonzero(self.noticed[:, lo:hi])
        if rows.size:
            np.subtract.at(self.counts, (rows, self.events.cell[lo + cols]), 1)

    # -- detection ------------------------------------------------------------

    def _record_hits(self, i: int, ids: np.ndarray, t: int) -> None:
        if len(ids):
            self._count_new([i], ids, t)
            self.detected[i, ids] = True
            self.noticed[i, ids] = True
            self.agents[i].sensed_buffer.extend(ids.tolist())

    def _detect_new(self, lo: int, hi: int, t: int) -> None:
        ev = self.events
        dx = ev.x[lo:hi, None] - self.pos[None, :, 0]
        dy = ev.y[lo:hi, None] - self.pos[None, :, 1]
        r_s = self.params.sensing.r_s
        d = np.hypot(dx, dy)
        p = np.where(d <= r_s, (1.0 - d / r_s) ** 2, 0.0)
        hits = self.sense_rng.random(p.shape) < p
        if self.check:
            self.attempts[:, lo:hi] += 1
        if hits.any():
            for i in np.flatnonzero(hits.any(axis=0)).tolist():
                self._record_hits(i, lo + np.flatnonzero(hits[:, i]), t)

    def _detect_after_move(self, i: int, t: int) -> None:
        lo, hi = self.events.span(t - self.spec.vis_time, t)
        if hi <= lo:
            return
        ev = self.events
        x, y = self.pos[i]
        r_s = self.params.sensing.r_s
        d = np.hypot(ev.x[lo:hi] - x, ev.y[lo:hi] - y)
        cand = np.flatnonzero((d <= r_s) & ~self.detected[i, lo:hi])
        if cand.size == 0:
            return
        p = (1.0 - d[cand] / r_s) ** 2
        hit = self.agent_rngs[i].random(cand.size) < p
        if self.check:
            self.attempts[i, lo + cand] += 1
        self._record_hits(i, lo + cand[hit], t)

    # -- moves ----------------------------------------------------------------

    def density_values(self, i: int, t: int) -> np.ndarray:
        """Agent ``i``'s normalised density estimate, rebuilt from its view."""
        lo, hi = self.events.span(t - self.params.time_window, t)
        mask = self.noticed[i, lo:hi]
        counts = np.bincount(self.events.cell[lo:hi][mask], minlength=self.grid.n_cells)
        return normalize_counts(counts)

    def neighbor_array(self, i: int) -> np.ndarray:
        locs = self.agents[i].view.known_locations
        if not locs:
            return np.empty((0, 2))
        arr = np.array([p for p, _ in locs.values()], dtype=float)
        x, y = self.pos[i]
        near = np.hypot(arr[:, 0] - x, arr[:, 1] - y) <= 2.0 * self.params.sensing.r_s
        return arr[near]

    def agent_gradient(self, i: int, t: int) -> tuple[float, float]:
        counts = self.counts[i]
        top = counts.max()
        if top == 0:
            return 0.0, 0.0
        if self.check and not np.array_equal(counts / top, self.density_values(i, t)):
            raise InvariantError(f"window counts of agent {i} drifted from its view")
        x, y = self.pos[i]
        return gradient_from_counts(float(x), float(y), self.neighbor_array(i), counts, top,
                                    self.grid, self.params.sensing.r_s)

    def move(self, i: int, t: int) -> None:
        params = self.params
        sw = params.switch
        a = self.agents[i]
        rng = self.agent_rngs[i]
        # a random-mode agent that cannot leave random mode does not need a gradient
        if a.mode == ExecutionMode.RANDOM and (a.forced_steps_left > 0 or math.isinf(sw.r_to_g_min_grad)):
            grad = (0.0, 0.0)
        else:
            grad = self.agent_gradient(i, t)
        was = a.mode
        mode, forced = decide_mode(a, math.hypot(*grad), sw, rng)
        apply_mode(a, mode, forced, sw, rng)
        if mode != was:
            self.n_gradient += 1 if mode == ExecutionMode.GRADIENT else -1

        forced_step = a.mode == ExecutionMode.RANDOM and a.forced_steps_left > 0
        old = a.pos
        a.pos = next_position(a, grad, params.step_size, self.region, rng, params.boundary)
        self.pos[i] = a.pos
        self._relink(i)
        if self.check and forced_step:
            self._check_forced_step(a, old)

        self._detect_after_move(i, t)
        msg = build_message(a)
        if self.check and msg.location is not None:
            self.gradient_reports[(i, t)] = msg.location
        recipients = self.component(i)
        if self.check:
            expect = comms.reachable_set(i, self.pos, params.sensing)
            if set(recipients) != expect:
                raise InvariantError("incremental link graph disagrees with the Boolean model")
        self._count_new(recipients, msg.events, t)
        for j in recipients:
            integrate_message(self.agents[j].view, msg, t)
            if self.check and msg.location is None and i in self.agents[j].view.known_locations:
                raise InvariantError(f"agent {j} kept a location for random-mode agent {i}")
        a.next_move_tick = t + params.still_time
        self.next_move[i] = a.next_move_tick

    def _check_forced_step(self, a: AgentState, old: Point) -> None:
        step = self.params.step_size
        raw = (old[0] + step * math.cos(a.forced_direction), old[1] + step * math.sin(a.forced_direction))
        if not self.region.contains(raw):
            return  # boundary rule bent the step
        if math.dist(raw, a.pos) > 1e-9 * step:
            raise InvariantError(f"forced step of agent {a.id} left its walk direction")

    # -- tick -----------------------------------------------------------------

    def step(self, t: int) -> None:
        """Advance one tick: new events and their detection, then every agent
        due to move, in id order. Footprints older than ``vis_time`` simply
        fall out of the id range consulted after moves."""
        self._expire(t)
        lo, hi = int(self.events.start[t]), int(self.events.start[t + 1])
        if hi > lo:
            self._detect_new(lo, hi, t)
        for i in np.flatnonzero(self.next_move == t).tolist():
            self.move(i, t)
        self.gradient_mode_ticks += self.n_gradient
        self.t = t + 1

    def snapshot(self, t: int) -> list[tuple]:
        return [(t, a.id, a.pos[0], a.pos[1], a.mode.name.lower()) for a in self.agents]

    def finish_checks(self) -> None:
        if (self.detected & ~self.noticed).any():
            raise InvariantError("an agent detected an event without noticing it")
        if math.isinf(self.params.switch.r_to_g_min_grad) and self.gradient_mode_ticks:
            raise InvariantError("gradient mode used under random behavior")
        vis = self.spec.vis_time
        bound = 1 + -(-(vis + 1) // self.params.still_time)
        if self.attempts.max(initial=0) > bound:
            raise InvariantError("an agent rolled for one event more than once per position")
        for a in self.agents:
            for j, (p, tick) in a.view.known_locations.items():
                if self.gradient_reports.get((j, tick)) != p:
                    raise InvariantError(f"agent {a.id} holds a location not reported in gradient mode")


# -- metrics ------------------------------------------------------------------

def global_fraction(detected: np.ndarray) -> float:
    """Percent of events detected by at least one agent. ``detected`` is an
    ``(n_agents, n_events)`` boolean matrix."""
    n_events = detected.shape[1]
    if n_events == 0:
        return 0.0
    return 100.0 * np.count_nonzero(detected.any(axis=0)) / n_events


def avg_local_fraction(noticed: np.ndarray, n_agents: Optional[int] = None) -> float:
    """Mean over agents of the percent of events each one took notice of."""
    n_agents = noticed.shape[0] if n_agents is None else n_agents
    n_events = noticed.shape[1]
    if n_events == 0 or n_agents == 0:
        return 0.0
    return 100.0 * np.count_nonzero(noticed) / (n_agents * n_events)


def window_metrics(detected: np.ndarray, noticed: np.ndarray, ticks: np.ndarray,
                   t: int, window: int, max_t: Optional[int] = None):
    """Both fractions over events with tick in ``[t - window//2, t + window//2]``
    (clipped to the run). Returns ``None`` when no event falls inside."""
    if window <= 0:
        raise ValueError("window must be positive")
    half = window // 2
    t0 = max(t - half, 0)
    t1 = t + half if max_t is None else min(t + half, max_t)
    sel = (ticks >= t0) & (ticks <= t1)
    if not sel.any():
        return None
    return global_fraction(detected[:, sel]), avg_local_fraction(noticed[:, sel])


def window_series(detected: np.ndarray, noticed: np.ndarray, start: np.ndarray,
                  window: int) -> np.ndarray:
    """:func:`window_metrics` for every tick at once via prefix sums."""
    max_t = len(start) - 1
    n_agents = detected.shape[0]
    per_event_any = detected.any(axis=0).astype(np.int64)
    per_event_notice = noticed.sum(axis=0, dtype=np.int64)
    cum_any = np.concatenate([[0], np.cumsum(per_event_any)])
    cum_notice = np.concatenate([[0], np.cumsum(per_event_notice)])
    half = window // 2
    t = np.arange(max_t)
    lo = start[np.clip(t - half, 0, max_t)]
    hi = start[np.clip(t + half + 1, 0, max_t)]
    count = hi - lo
    out = np.full((max_t, 2), np.nan)
    ok = count > 0
    out[ok, 0] = 100.0 * (cum_any[hi[ok]] - cum_any[lo[ok]]) / count[ok]
    out[ok, 1] = 100.0 * (cum_notice[hi[ok]] - cum_notice[lo[ok]]) / (count[ok] * n_agents)
    return out


# -- runs ---------------------------------------------------------------------

def run(params: SimParams, spec: ScenarioSpec, seed: int, snapshot_interval: int = 0,
        check: bool = False, initial_positions=None) -> RunResult:
    """One replication from uniformly random starting positions (unless
    given), all agents in random mode. Identical inputs give identical results."""
    world = World(params, spec, seed, check=check, initial_positions=initial_positions)
    snaps = []
    for t in range(spec.max_t):
        world.step(t)
        if snapshot_interval and t % snapshot_interval == 0:
            snaps.extend(world.snapshot(t))
    g = global_fraction(world.detected)
    loc = avg_local_fraction(world.noticed)
    if check:
        world.finish_checks()
        if loc > g + 1e-9:
            raise InvariantError(f"average local fraction {loc} exceeds global {g}")
    series = window_series(world.detected, world.noticed, world.events.start,
                           params.metric_window_size)
    return RunResult(g, loc, series, len(world.events), seed, world.gradient_mode_ticks, snaps)


def _run_job(job):
    return run(*job)


def run_many(params: SimParams, spec: ScenarioSpec, seeds, parallel: int = 1,
             snapshot_interval: int = 0, check: bool = False) -> list[RunResult]:
    """Independent replications, returned in ``seeds`` order."""
    jobs = [(params, spec, s, snapshot_interval, check) for s in seeds]
    if parallel <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_run_job, jobs))


def mean_ci(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width (sample sd)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least two values for a confidence interval")
    return float(v.mean()), float(Z95 * v.std(ddof=1) / math.sqrt(v.size))


def aggregate(results: list[RunResult]) -> AggregateResult:
    if len(results) < 2:
        raise ValueError("aggregation needs at least two replications")
    metrics = {
        "global": mean_ci([r.global_fraction for r in results]),
        "local": mean_ci([r.avg_local_fraction for r in results]),
    }
    stack = np.stack([r.window_series for r in results])  # (n, T, 2)
    present = np.sum(~np.isnan(stack), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.nanmean(np.where(present[None] > 0, stack, 0.0), axis=0)
        mean[present == 0] = np.nan
        sd = np.sqrt(np.nansum((stack - mean[None]) ** 2, axis=0) / (present - 1))
        half = Z95 * sd / np.sqrt(present)
    half[present < 2] = np.nan
    return AggregateResult(len(results), metrics, mean, half)
