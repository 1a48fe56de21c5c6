"""Probabilistic sensing, Boolean-model links, and joint detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import distance


@dataclass(frozen=True)
class SensingParams:
    r_s: float = 100.0  # max sensing range
    r_c: float = 200.0  # max communication range

    def __post_init__(self):
        if not (self.r_s > 0 and self.r_c > 0):
            raise ValueError("sensing and communication ranges must be positive")


def detection_prob_at(d, r_s: float):
    """(1 - d/r_s)^2 inside the sensing disc, 0 outside. Accepts arrays."""
    d = np.asarray(d, dtype=float)
    out = np.where(d <= r_s, (1.0 - d / r_s) ** 2, 0.0)
    return out if out.ndim else float(out)


def detection_prob(agent_pos, q, params: SensingParams) -> float:
    d = distance(agent_pos, q)
    if d > params.r_s:
        return 0.0
    return (1.0 - d / params.r_s) ** 2


def can_communicate(a, b, params: SensingParams) -> bool:
    return distance(a, b) <= params.r_c


def joint_detection_prob(agent_positions, q, params: SensingParams) -> float:
    """Probability that at least one of the agents detects an event at ``q``."""
    miss = 1.0
    for pos in agent_positions:
        miss *= 1.0 - detection_prob(pos, q, params)
    return 1.0 - miss


def attempt_detection(rng: np.random.Generator, p: float) -> bool:
    """One Bernoulli(p) trial; always consumes exactly one uniform draw."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return bool(rng.random() < p)
