"""Agent state machine: mode switching, movement, and message handling."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Point, Region


class ExecutionMode(enum.IntEnum):
    RANDOM = 0
    GRADIENT = 1


@dataclass(frozen=True)
class SwitchParams:
    r_to_g_min_grad: float = 0.01
    g_to_r_max_grad: float = 1e-5
    g_to_r_prob: float = 0.0
    g_to_r_first_steps: int = 0

    def __post_init__(self):
        if self.r_to_g_min_grad < 0 or self.g_to_r_max_grad < 0:
            raise ValueError("gradient thresholds must be nonnegative")
        if not 0.0 <= self.g_to_r_prob <= 1.0:
            raise ValueError("g_to_r_prob must lie in [0, 1]")
        if self.g_to_r_first_steps < 0:
            raise ValueError("g_to_r_first_steps must be nonnegative")


@dataclass(frozen=True)
class Message:
    """One flood message.

    ``location`` is ``None`` when the sender moved in random mode. ``events``
    holds ids into the run's event table; an event's position and tick never
    change, so an id stands for the full record.
    """

    origin: int
    seq: int
    location: Optional[Point]
    events: np.ndarray


class AgentView:
    """What one agent knows: events, other agents' last valid reports, and
    which messages it has already handled.

    ``known`` is a boolean mask over event ids. The engine passes a row of its
    notice matrix so the view and the metric share storage.
    """

    def __init__(self, owner: int, known: np.ndarray | int):
        self.owner = owner
        if isinstance(known, (int, np.integer)):
            known = np.zeros(int(known), dtype=bool)
        self.known = known
        self.known_locations: dict[int, tuple[Point, int]] = {}
        # per-origin highest seq handled; seqs rise per origin and delivery is
        # instantaneous, so anything at or below it is a repeat
        self.seen: dict[int, int] = {}

    def has_seen(self, origin: int, seq: int) -> bool:
        return seq <= self.seen.get(origin, -1)

    def add_events(self, ids) -> None:
        self.known[ids] = True

    @property
    def n_known(self) -> int:
        return int(np.count_nonzero(self.known))


@dataclass
class AgentState:
    id: int
    pos: Point
    view: AgentView
    mode: ExecutionMode = ExecutionMode.RANDOM
    sensed_buffer: list = field(default_factory=list)
    next_move_tick: int = 0
    forced_steps_left: int = 0
    forced_direction: float = 0.0
    seq: int = 0


def decide_mode(state: AgentState, grad_mag: float, params: SwitchParams,
                rng: np.random.Generator) -> tuple[ExecutionMode, bool]:
    """Mode for the move about to be made, and whether a forced walk starts.

    Threshold rules come first; the probabilistic escape is only tried by an
    agent that is in gradient mode and would otherwise stay there. An agent
    still on a forced walk stays in random mode until the walk ends.
    """
    if grad_mag < 0:
        raise ValueError("gradient magnitude must be nonnegative")
    if state.mode == ExecutionMode.RANDOM:
        if state.forced_steps_left > 0:
            return ExecutionMode.RANDOM, False
        if grad_mag > params.r_to_g_min_grad:
            return ExecutionMode.GRADIENT, False
        return ExecutionMode.RANDOM, False
    if grad_mag < params.g_to_r_max_grad:
        return ExecutionMode.RANDOM, False
    if params.g_to_r_prob > 0 and rng.random() < params.g_to_r_prob:
        return ExecutionMode.RANDOM, True
    return ExecutionMode.GRADIENT, False


def apply_mode(state: AgentState, mode: ExecutionMode, forced: bool,
               params: SwitchParams, rng: np.random.Generator) -> None:
    """Commit a :func:`decide_mode` outcome to ``state``."""
    state.mode = mode
    if forced:
        state.forced_steps_left = params.g_to_r_first_steps
        state.forced_direction = rng.uniform(0.0, 2.0 * math.pi)
    elif mode == ExecutionMode.GRADIENT:
        state.forced_steps_left = 0


def next_position(state: AgentState, grad, step_size: float, region: Region,
                  rng: np.random.Generator, boundary: str = "clamp") -> Point:
    """Where the agent lands after one step. Decrements the forced-walk counter
    when a forced step is taken."""
    x, y = state.pos
    if state.mode == ExecutionMode.GRADIENT:
        nx, ny = x + step_size * grad[0], y + step_size * grad[1]
    else:
        if state.forced_steps_left > 0:
            angle = state.forced_direction
            state.forced_steps_left -= 1
        else:
            angle = rng.uniform(0.0, 2.0 * math.pi)
        nx, ny = x + step_size * math.cos(angle), y + step_size * math.sin(angle)
    if boundary == "reflect":
        return region.reflect(nx, ny)
    return region.clamp(nx, ny)


def build_message(state: AgentState) -> Message:
    """Package this move's report and drain the sensed buffer."""
    loc = state.pos if state.mode == ExecutionMode.GRADIENT else None
    msg = Message(state.id, state.seq, loc, np.asarray(state.sensed_buffer, dtype=np.int64))
    state.seq += 1
    state.sensed_buffer = []
    return msg


def integrate_message(view: AgentView, msg: Message, now: int) -> tuple[AgentView, bool]:
    """Fold ``msg`` into ``view``. Returns the view and whether the message was
    new here (and so should be passed on)."""
    if msg.origin == view.owner or view.has_seen(msg.origin, msg.seq):
        return view, False
    view.seen[msg.origin] = msg.seq
    if len(msg.events):
        view.known[msg.events] = True
    if msg.location is None:
        view.known_locations.pop(msg.origin, None)
    else:
        view.known_locations[msg.origin] = (msg.location, now)
    return view, True
