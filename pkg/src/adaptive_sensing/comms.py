"""Instantaneous flooding over the Boolean-model communication graph."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .agent import AgentState, Message, integrate_message
from .sensing import SensingParams


def link_matrix(positions, r_c: float) -> np.ndarray:
    """Boolean adjacency: ``True`` where two agents are within ``r_c``."""
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    return d <= r_c


def reachable_set(origin_index: int, positions, params: SensingParams) -> set[int]:
    """Agents reachable from ``origin_index`` over any number of hops,
    excluding the origin itself."""
    pts = np.ascontiguousarray(np.asarray(positions, dtype=float).reshape(-1, 2))
    reached = _reach_from(pts, float(params.r_c), int(origin_index))
    reached[origin_index] = False
    return set(np.flatnonzero(reached).tolist())


@njit(cache=True)
def _reach_from(pts, r_c, start):  # pragma: no cover - compiled
    n = pts.shape[0]
    reached = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    reached[start] = True
    queue[0] = start
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for v in range(n):
            if not reached[v] and math.hypot(pts[u, 0] - pts[v, 0], pts[u, 1] - pts[v, 1]) <= r_c:
                reached[v] = True
                queue[tail] = v
                tail += 1
    return reached


def broadcast(msg: Message, sender_index: int, agents: list[AgentState],
              params: SensingParams, now: int = 0, positions=None) -> dict[int, bool]:
    """Deliver ``msg`` to the sender's connected component.

    With zero-latency links and forward-once-on-first-receipt, hop-by-hop
    flooding reaches exactly the component, so recipients are handled directly
    in ascending id order. Returns ``{recipient: first_time}``.
    """
    if positions is None:
        positions = [a.pos for a in agents]
    report = {}
    for j in sorted(reachable_set(sender_index, positions, params)):
        _, fresh = integrate_message(agents[j].view, msg, now)
        report[j] = fresh
    return report
