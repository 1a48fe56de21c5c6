"""Simulation parameters and the TOML scenario file format.

A scenario file has a ``[scenario]`` table (totals, timing, region), a
``[params]`` table with every simulation parameter plus nested ``switch`` and
``sensing`` tables, and one ``[[patches]]`` entry per density patch. Infinite
thresholds are written as ``inf``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import tomli
import tomli_w

from .agent import SwitchParams
from .geometry import Region
from .scenario import Patch, ScenarioSpec
from .sensing import SensingParams


@dataclass(frozen=True)
class SimParams:
    n_agents: int = 30
    still_time: int = 10
    step_size: float = 30.0
    time_window: int = 1_000
    switch: SwitchParams = field(default_factory=SwitchParams)
    sensing: SensingParams = field(default_factory=SensingParams)
    delta: float = 10.0
    metric_window_size: int = 900
    boundary: str = "clamp"  # or "reflect"
    phase_offsets: bool = True  # random per-agent move phase in [0, still_time)

    def __post_init__(self):
        if self.n_agents < 1 or self.still_time < 1 or self.time_window < 1:
            raise ValueError("n_agents, still_time and time_window must be positive")
        if not (self.step_size > 0 and self.delta > 0):
            raise ValueError("step_size and delta must be positive")
        if self.metric_window_size < 1:
            raise ValueError("metric_window_size must be positive")
        if self.boundary not in ("clamp", "reflect"):
            raise ValueError(f"unknown boundary rule {self.boundary!r}")


class ConfigError(ValueError):
    pass


def to_dict(spec: ScenarioSpec, params: SimParams) -> dict:
    p = asdict(params)
    return {
        "scenario": {
            "total_events": spec.total_events,
            "max_t": spec.max_t,
            "vis_time": spec.vis_time,
            "region": {"width": spec.region.width, "height": spec.region.height},
        },
        "params": p,
        "patches": [
            {
                "rect": list(pt.rect),
                "velocity": list(pt.velocity),
                "t_start": pt.t_start,
                "t_end": pt.t_end,
                "weight": pt.weight,
            }
            for pt in spec.patches
        ],
    }


def _build(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    return cls(**data)


def from_dict(doc: dict) -> tuple[ScenarioSpec, SimParams]:
    try:
        sc = dict(doc["scenario"])
        region = _build(Region, sc.pop("region", {"width": 1000.0, "height": 1000.0}), "scenario.region")
        patches = tuple(
            Patch(rect=tuple(p["rect"]), velocity=tuple(p.get("velocity", (0.0, 0.0))),
                  t_start=int(p["t_start"]), t_end=int(p["t_end"]), weight=float(p.get("weight", 1.0)))
            for p in doc.get("patches", [])
        )
        spec = ScenarioSpec(patches=patches, region=region, **sc)
        pr = dict(doc["params"])
        pr["switch"] = _build(SwitchParams, pr.get("switch", {}), "params.switch")
        pr["sensing"] = _build(SensingParams, pr.get("sensing", {}), "params.sensing")
        params = _build(SimParams, pr, "params")
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from exc
    if not spec.patches:
        raise ConfigError("scenario needs at least one patch")
    return spec, params


def dumps(spec: ScenarioSpec, params: SimParams) -> str:
    return tomli_w.dumps(to_dict(spec, params))


def loads(text: str) -> tuple[ScenarioSpec, SimParams]:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from exc
    return from_dict(doc)


def dump(path, spec: ScenarioSpec, params: SimParams) -> None:
    Path(path).write_text(dumps(spec, params))


def load(path) -> tuple[ScenarioSpec, SimParams]:
    return loads(Path(path).read_text())
