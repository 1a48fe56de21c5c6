"""Simulator for networks of mobile sensing agents that alternate between
random exploration and ascent on a locally estimated event-density gradient."""

from .agent import ExecutionMode, SwitchParams
from .config import SimParams
from .engine import RunResult, aggregate, run, run_many
from .geometry import Grid, Point, Region
from .scenario import Patch, ScenarioSpec, preset
from .sensing import SensingParams

__all__ = [
    "ExecutionMode", "Grid", "Patch", "Point", "Region", "RunResult", "ScenarioSpec",
    "SensingParams", "SimParams", "SwitchParams", "aggregate", "preset", "run", "run_many",
]
