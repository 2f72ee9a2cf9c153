"""Scripted runs: a boundary, initial robots, and a timed command list.

Scenario files stand in for live participants so any session — including
the experiment conditions — reproduces headlessly from a single JSON file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .agents import BoundaryRegion
from .commands import AddHuman, Command, MoveHuman, RemoveHuman, SetGesture, command_from_dict
from .engine import EngineConfig
from .geometry import Vec2
from .modes import mode_table_from_dict


class ScenarioError(ValueError):
    """Schema violation in a scenario file, with a field-level message."""


@dataclass(frozen=True)
class TimedCommand:
    time_s: float
    command: Command


@dataclass
class Scenario:
    name: str
    boundary: BoundaryRegion
    robots: list[Vec2]
    seed: int = 0
    config_overrides: dict = field(default_factory=dict)
    timeline: list[TimedCommand] = field(default_factory=list)
    duration_s: float | None = None

    def engine_config(self) -> EngineConfig:
        base = EngineConfig(boundary=self.boundary, seed=self.seed).to_dict()
        for key, value in self.config_overrides.items():
            if key not in base or key in ("boundary", "seed"):
                raise ScenarioError(f"config: unknown or reserved override '{key}'")
            base[key] = value
        return EngineConfig.from_dict(base)


def parse_scenario(data: dict, name_hint: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")

    def fail(path: str, msg: str) -> ScenarioError:
        return ScenarioError(f"{path}: {msg}")

    try:
        boundary = BoundaryRegion.from_dict(data["boundary"])
    except KeyError:
        raise fail("boundary", "missing") from None
    except (TypeError, ValueError) as exc:
        raise fail("boundary", str(exc)) from exc

    robots_raw = data.get("robots")
    if not isinstance(robots_raw, list) or not robots_raw:
        raise fail("robots", "must be a non-empty list of [x, y] pairs")
    robots = []
    for idx, item in enumerate(robots_raw):
        try:
            p = Vec2(float(item[0]), float(item[1]))
        except (TypeError, ValueError, IndexError) as exc:
            raise fail(f"robots[{idx}]", "expected [x, y]") from exc
        if not p.is_finite():
            raise fail(f"robots[{idx}]", "coordinates must be finite")
        robots.append(p)

    overrides = data.get("config", {})
    if not isinstance(overrides, dict):
        raise fail("config", "must be an object")
    if "mode_table" in overrides:
        try:
            mode_table_from_dict(overrides["mode_table"])
        except ValueError as exc:
            raise fail("config.mode_table", str(exc)) from exc

    timeline_raw = data.get("timeline", [])
    if not isinstance(timeline_raw, list):
        raise fail("timeline", "must be a list")
    timeline = []
    last_t = -math.inf
    known_humans: set[int] = set()
    for idx, entry in enumerate(timeline_raw):
        path = f"timeline[{idx}]"
        if not isinstance(entry, dict) or "time_s" not in entry or "command" not in entry:
            raise fail(path, "expected {time_s, command}")
        try:
            t = float(entry["time_s"])
        except (TypeError, ValueError) as exc:
            raise fail(f"{path}.time_s", "must be a number") from exc
        if not math.isfinite(t) or t < 0:
            raise fail(f"{path}.time_s", "must be finite and >= 0")
        if t < last_t:
            raise fail(f"{path}.time_s", "timeline must be sorted by time")
        last_t = t
        try:
            cmd = command_from_dict(entry["command"])
        except ValueError as exc:
            raise fail(f"{path}.command", str(exc)) from exc
        if isinstance(cmd, AddHuman):
            if cmd.human_id in known_humans:
                raise fail(f"{path}.command", f"human {cmd.human_id} already declared")
            known_humans.add(cmd.human_id)
        elif isinstance(cmd, (MoveHuman, SetGesture)):
            if cmd.human_id not in known_humans:
                raise fail(f"{path}.command", f"human {cmd.human_id} not declared before use")
        elif isinstance(cmd, RemoveHuman):
            if cmd.human_id not in known_humans:
                raise fail(f"{path}.command", f"human {cmd.human_id} not declared before use")
            known_humans.discard(cmd.human_id)
        timeline.append(TimedCommand(t, cmd))

    duration = data.get("duration_s")
    if duration is not None:
        try:
            duration = float(duration)
        except (TypeError, ValueError) as exc:
            raise fail("duration_s", "must be a number") from exc
        if not math.isfinite(duration) or duration <= 0:
            raise fail("duration_s", "must be finite and > 0")

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise fail("seed", "must be an integer")

    return Scenario(
        name=str(data.get("name", name_hint)),
        boundary=boundary,
        robots=robots,
        seed=seed,
        config_overrides=overrides,
        timeline=timeline,
        duration_s=duration,
    )


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON at line {exc.lineno}") from exc
    return parse_scenario(data, name_hint=p.stem)
