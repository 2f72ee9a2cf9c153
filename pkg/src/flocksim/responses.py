"""Gesture responses, head gaze selection, light-ring state, and the arm
trajectory picker.

Responses occupy one robot subsystem each (head, base, or gripper). Once
begun, a response always runs to completion; new triggers on a busy
subsystem are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .geometry import Vec2
from .gestures import Gesture
from .rng import SplitMix64


class ResponseKind(str, Enum):
    GAZE_UP = "gaze_up"
    SPIN_IN_PLACE = "spin_in_place"
    GRIPPER_OPEN_CLOSE = "gripper_open_close"
    PULSE_GREEN = "pulse_green"


class LightColor(str, Enum):
    LIGHT_BLUE = "light_blue"
    YELLOW = "yellow"
    ORANGE = "orange"
    GREEN = "green"
    DARK_BLUE = "dark_blue"


class Subsystem(str, Enum):
    HEAD = "head"
    BASE = "base"
    GRIPPER = "gripper"


RESPONSE_DURATION_S: dict[ResponseKind, float] = {
    ResponseKind.GAZE_UP: 4.0,
    ResponseKind.SPIN_IN_PLACE: 12.0,
    ResponseKind.GRIPPER_OPEN_CLOSE: 2.0,
    ResponseKind.PULSE_GREEN: 2.0,
}

RESPONSE_COLOR: dict[ResponseKind, LightColor] = {
    ResponseKind.GAZE_UP: LightColor.ORANGE,
    ResponseKind.SPIN_IN_PLACE: LightColor.GREEN,
    ResponseKind.PULSE_GREEN: LightColor.GREEN,
    ResponseKind.GRIPPER_OPEN_CLOSE: LightColor.DARK_BLUE,
}

RESPONSE_SUBSYSTEM: dict[ResponseKind, Subsystem] = {
    ResponseKind.GAZE_UP: Subsystem.HEAD,
    ResponseKind.SPIN_IN_PLACE: Subsystem.BASE,
    ResponseKind.PULSE_GREEN: Subsystem.BASE,
    ResponseKind.GRIPPER_OPEN_CLOSE: Subsystem.GRIPPER,
}

# Full turn over the spin duration: 360 degrees in 12 s.
SPIN_RATE_RAD_S = 2.0 * math.pi / RESPONSE_DURATION_S[ResponseKind.SPIN_IN_PLACE]

# A spin is refused (light pulse instead) when another robot is closer than
# this; reuses the separation distance.
SPIN_DENIAL_RADIUS_M = 1.5


class ResponseStatus(Enum):
    RUNNING = "running"
    COMPLETED = "completed"


@dataclass
class ResponseAction:
    robot_id: int
    kind: ResponseKind
    elapsed_s: float = 0.0
    begun_tick: int = 0

    @property
    def duration_s(self) -> float:
        return RESPONSE_DURATION_S[self.kind]

    @property
    def light_color(self) -> LightColor:
        return RESPONSE_COLOR[self.kind]

    @property
    def subsystem(self) -> Subsystem:
        return RESPONSE_SUBSYSTEM[self.kind]

    def to_dict(self) -> dict:
        return {
            "robot_id": self.robot_id,
            "kind": self.kind.value,
            "elapsed_s": self.elapsed_s,
            "light_color": self.light_color.value,
        }


GESTURE_RESPONSE: dict[Gesture, ResponseKind] = {
    Gesture.HANDS_TOGETHER: ResponseKind.GAZE_UP,
    Gesture.RIGHT_HAND_UP: ResponseKind.SPIN_IN_PLACE,
    Gesture.LEFT_HAND_UP: ResponseKind.GRIPPER_OPEN_CLOSE,
}


def begin_response(
    robot_id: int,
    gesture: Gesture,
    robot_positions: Mapping[int, Vec2],
    denial_radius_m: float = SPIN_DENIAL_RADIUS_M,
    tick: int = 0,
) -> ResponseAction:
    """Map a confirmed gesture to this robot's response. A spin downgrades
    to a green pulse when any other robot is within the denial radius."""
    kind = GESTURE_RESPONSE[gesture]
    if kind is ResponseKind.SPIN_IN_PLACE:
        me = robot_positions[robot_id]
        for other_id, pos in robot_positions.items():
            if other_id != robot_id and me.distance_to(pos) < denial_radius_m:
                kind = ResponseKind.PULSE_GREEN
                break
    return ResponseAction(robot_id=robot_id, kind=kind, begun_tick=tick)


def tick_response(action: ResponseAction, dt: float) -> ResponseStatus:
    """Advance a response by one tick. Completed exactly when the elapsed
    time reaches the kind's duration (1 ns slack absorbs float accumulation
    so a response always runs ceil(duration/dt) ticks)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    elapsed = action.elapsed_s + dt
    if elapsed >= action.duration_s - 1e-9:
        action.elapsed_s = action.duration_s
        return ResponseStatus.COMPLETED
    action.elapsed_s = elapsed
    return ResponseStatus.RUNNING


@dataclass(frozen=True)
class GazeTarget:
    """Where one robot head should look: a human id, or None for the
    region center."""

    robot_id: int
    human_id: int | None

    def to_dict(self) -> dict:
        return {"robot_id": self.robot_id, "target": "center" if self.human_id is None else self.human_id}


def head_targets(
    robot_positions: Mapping[int, Vec2],
    humans: Sequence[tuple[int, Vec2, bool]],
) -> list[GazeTarget]:
    """Gaze selection for the whole flock.

    Gesturing humans win: everyone looks at the lowest-id gesturing human.
    Otherwise each robot looks at its nearest human (ties to the lower id),
    or at the region center when nobody is around. `humans` carries
    (human_id, position, gesturing) for humans inside the region.
    """
    robot_ids = sorted(robot_positions)
    gesturing = sorted(h[0] for h in humans if h[2])
    if gesturing:
        return [GazeTarget(rid, gesturing[0]) for rid in robot_ids]
    if humans:
        targets = []
        for rid in robot_ids:
            pos = robot_positions[rid]
            best = min(humans, key=lambda h: (pos.distance_to(h[1]), h[0]))
            targets.append(GazeTarget(rid, best[0]))
        return targets
    return [GazeTarget(rid, None) for rid in robot_ids]


def light_color(
    active_responses: Sequence[ResponseAction],
    humans_in_region: bool,
) -> LightColor:
    """Ring color for one robot. An active response's color wins (newest
    first; subsystem order breaks begin-tick ties), then human presence
    turns the ring yellow, and the idle color is light blue."""
    if active_responses:
        order = [s for s in Subsystem]
        newest = max(
            active_responses,
            key=lambda r: (r.begun_tick, -order.index(r.subsystem)),
        )
        return newest.light_color
    return LightColor.YELLOW if humans_in_region else LightColor.LIGHT_BLUE


# Nominal lengths of the four choreographed arm trajectories.
ARM_TRAJECTORY_DURATIONS_S: tuple[float, ...] = (8.0, 10.0, 12.0, 14.0)


@dataclass
class ArmState:
    trajectory_id: int = 0
    elapsed_s: float = 0.0


def arm_service_tick(arm: ArmState, dt: float, rng: SplitMix64) -> bool:
    """Advance the arm; when the current trajectory finishes, draw the next
    one uniformly from the four choices. Returns True when a new trajectory
    starts this tick. Arm motion never interrupts anything else."""
    arm.elapsed_s += dt
    if arm.elapsed_s < ARM_TRAJECTORY_DURATIONS_S[arm.trajectory_id]:
        return False
    arm.trajectory_id = rng.randint_below(len(ARM_TRAJECTORY_DURATIONS_S))
    arm.elapsed_s = 0.0
    return True


@dataclass(frozen=True)
class SoundEvent:
    """Stand-in for the movement-to-sound triggers: one record per begun
    response (source = its subsystem) and per new arm trajectory."""

    tick: int
    robot_id: int
    source: str  # "gripper" | "base" | "head" | "arm"
    detail: str

    def to_dict(self) -> dict:
        return {"robot_id": self.robot_id, "source": self.source, "detail": self.detail}
