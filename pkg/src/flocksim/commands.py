"""Commands steering a running engine, and the experiment conditions.

Commands are immutable values with a stable JSON encoding so they can be
queued, logged, replayed, and sent over the gateway unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .geometry import Vec2
from .gestures import Gesture
from .modes import ModeId


class ConditionKind(str, Enum):
    HUMAN_CHOREOGRAPHER = "human_choreographer"
    MODEL_PREDICTION = "model_prediction"
    CONTROL = "control"
    FIXED = "fixed"


@dataclass(frozen=True)
class Condition:
    kind: ConditionKind
    fixed_mode: ModeId | None = None

    def __post_init__(self) -> None:
        if self.kind is ConditionKind.FIXED and self.fixed_mode is None:
            raise ValueError("fixed condition requires a mode")
        if self.kind is not ConditionKind.FIXED and self.fixed_mode is not None:
            raise ValueError(f"{self.kind.value} condition takes no mode")

    def to_dict(self) -> dict:
        d: dict = {"condition": self.kind.value}
        if self.fixed_mode is not None:
            d["mode"] = self.fixed_mode.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Condition":
        kind = ConditionKind(d["condition"])
        mode = ModeId(d["mode"]) if "mode" in d and d["mode"] is not None else None
        return cls(kind=kind, fixed_mode=mode)


@dataclass(frozen=True)
class SetMode:
    mode: ModeId


@dataclass(frozen=True)
class AddHuman:
    human_id: int
    position: Vec2


@dataclass(frozen=True)
class MoveHuman:
    human_id: int
    position: Vec2


@dataclass(frozen=True)
class RemoveHuman:
    human_id: int


@dataclass(frozen=True)
class SetGesture:
    human_id: int
    gesture: Gesture | None


@dataclass(frozen=True)
class SetCondition:
    condition: Condition


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Pause:
    pass


Command = Union[SetMode, AddHuman, MoveHuman, RemoveHuman, SetGesture, SetCondition, Start, Pause]


@dataclass(frozen=True)
class Ack:
    ok: bool
    detail: str | None = None

    @classmethod
    def yes(cls, detail: str | None = None) -> "Ack":
        return cls(True, detail)

    @classmethod
    def no(cls, detail: str) -> "Ack":
        return cls(False, detail)


def command_to_dict(cmd: Command) -> dict:
    if isinstance(cmd, SetMode):
        return {"type": "set_mode", "mode": cmd.mode.value}
    if isinstance(cmd, AddHuman):
        return {"type": "add_human", "human_id": cmd.human_id, "x": cmd.position.x, "y": cmd.position.y}
    if isinstance(cmd, MoveHuman):
        return {"type": "move_human", "human_id": cmd.human_id, "x": cmd.position.x, "y": cmd.position.y}
    if isinstance(cmd, RemoveHuman):
        return {"type": "remove_human", "human_id": cmd.human_id}
    if isinstance(cmd, SetGesture):
        return {
            "type": "set_gesture",
            "human_id": cmd.human_id,
            "gesture": cmd.gesture.value if cmd.gesture is not None else None,
        }
    if isinstance(cmd, SetCondition):
        return {"type": "set_condition", **cmd.condition.to_dict()}
    if isinstance(cmd, Start):
        return {"type": "start"}
    if isinstance(cmd, Pause):
        return {"type": "pause"}
    raise TypeError(f"unknown command {cmd!r}")


def command_from_dict(d: dict) -> Command:
    """Decode a command object; raises ValueError with a reason on any
    malformed input (unknown type, bad ids, bad enums)."""
    if not isinstance(d, dict):
        raise ValueError("command must be an object")
    ctype = d.get("type")
    try:
        if ctype == "set_mode":
            return SetMode(ModeId(d["mode"]))
        if ctype == "add_human":
            return AddHuman(int(d["human_id"]), Vec2(float(d["x"]), float(d["y"])))
        if ctype == "move_human":
            return MoveHuman(int(d["human_id"]), Vec2(float(d["x"]), float(d["y"])))
        if ctype == "remove_human":
            return RemoveHuman(int(d["human_id"]))
        if ctype == "set_gesture":
            g = d.get("gesture")
            return SetGesture(int(d["human_id"]), Gesture(g) if g is not None else None)
        if ctype == "set_condition":
            return SetCondition(Condition.from_dict(d))
        if ctype == "start":
            return Start()
        if ctype == "pause":
            return Pause()
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed '{ctype}' command: {exc}") from exc
    raise ValueError(f"unknown command type {ctype!r}")
