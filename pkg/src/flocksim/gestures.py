"""Gesture classification from tracked body keypoints, plus the canonical
simulated poses and the hold-to-trigger debouncer.

Priority is fixed: hands-together beats either hand-up whenever its
predicate holds (hands joined above the shoulders still read as
hands-together), and right-hand-up beats left when both hands are raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .geometry import Vec2

Point3 = tuple[float, float, float]

# 3D wrist-to-wrist distance below which the hands count as joined.
HANDS_TOGETHER_MAX_DIST_M = 0.08

# Consecutive identical classifications required before a gesture triggers.
DEBOUNCE_TICKS = 3


class Gesture(str, Enum):
    HANDS_TOGETHER = "hands_together"
    RIGHT_HAND_UP = "right_hand_up"
    LEFT_HAND_UP = "left_hand_up"


@dataclass
class HumanKeypoints:
    """Partial skeleton of one tracked human (z-up, meters). Any keypoint
    may be missing — occlusion leaves gaps in real detections."""

    human_id: int
    position: Vec2
    left_wrist: Point3 | None = None
    right_wrist: Point3 | None = None
    left_shoulder: Point3 | None = None
    right_shoulder: Point3 | None = None

    def __post_init__(self) -> None:
        for name in ("left_wrist", "right_wrist", "left_shoulder", "right_shoulder"):
            p = getattr(self, name)
            if p is not None and not all(math.isfinite(c) for c in p):
                raise ValueError(f"human {self.human_id}: non-finite {name}")
        if self.left_shoulder is not None and self.right_shoulder is not None:
            if _dist3(self.left_shoulder, self.right_shoulder) >= 1.0:
                raise ValueError(f"human {self.human_id}: implausible shoulder span")


def _dist3(a: Point3, b: Point3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def classify_gesture(kp: HumanKeypoints) -> Gesture | None:
    """Classify one detection frame; None when nothing matches or too few
    keypoints are visible.

    A hand-up test needs that wrist plus at least one shoulder; the wrist
    must be above the highest visible shoulder.
    """
    if kp.left_wrist is not None and kp.right_wrist is not None:
        if _dist3(kp.left_wrist, kp.right_wrist) < HANDS_TOGETHER_MAX_DIST_M:
            return Gesture.HANDS_TOGETHER

    shoulders = [s for s in (kp.left_shoulder, kp.right_shoulder) if s is not None]
    if not shoulders:
        return None
    shoulder_z = max(s[2] for s in shoulders)

    if kp.right_wrist is not None and kp.right_wrist[2] > shoulder_z:
        return Gesture.RIGHT_HAND_UP
    if kp.left_wrist is not None and kp.left_wrist[2] > shoulder_z:
        return Gesture.LEFT_HAND_UP
    return None


# Canonical simulated poses. Shoulders sit at 1.4 m, raised wrists at 1.8 m,
# lowered wrists at 1.0 m; joined hands meet at 1.6 m (above the shoulders,
# which exercises the priority rule).
_SHOULDER_Z = 1.4
_RAISED_Z = 1.8
_LOWERED_Z = 1.0
_JOINED_Z = 1.6


def keypoints_for_pose(human_id: int, position: Vec2, gesture: Gesture | None) -> HumanKeypoints:
    """Ground-truth skeleton for a scripted human holding a gesture."""
    x, y = position
    left_shoulder = (x - 0.175, y, _SHOULDER_Z)
    right_shoulder = (x + 0.175, y, _SHOULDER_Z)
    left_wrist: Point3 = (x - 0.25, y, _LOWERED_Z)
    right_wrist: Point3 = (x + 0.25, y, _LOWERED_Z)
    if gesture is Gesture.HANDS_TOGETHER:
        left_wrist = right_wrist = (x, y + 0.25, _JOINED_Z)
    elif gesture is Gesture.RIGHT_HAND_UP:
        right_wrist = (x + 0.2, y, _RAISED_Z)
    elif gesture is Gesture.LEFT_HAND_UP:
        left_wrist = (x - 0.2, y, _RAISED_Z)
    return HumanKeypoints(
        human_id=human_id,
        position=position,
        left_wrist=left_wrist,
        right_wrist=right_wrist,
        left_shoulder=left_shoulder,
        right_shoulder=right_shoulder,
    )


class GestureDebouncer:
    """Per-human hold filter: a classification must repeat for
    DEBOUNCE_TICKS consecutive ticks before it is confirmed."""

    def __init__(self, hold_ticks: int = DEBOUNCE_TICKS) -> None:
        if hold_ticks < 1:
            raise ValueError("hold_ticks must be >= 1")
        self.hold_ticks = hold_ticks
        self._last_raw: Gesture | None = None
        self._run = 0
        self.confirmed: Gesture | None = None

    def update(self, raw: Gesture | None) -> tuple[Gesture | None, bool]:
        """Feed one tick's classification; returns (confirmed gesture,
        onset flag). The onset flag is True only on the tick a new gesture
        becomes confirmed."""
        if raw is None:
            self._last_raw = None
            self._run = 0
            self.confirmed = None
            return None, False
        if raw == self._last_raw:
            self._run += 1
        else:
            self._last_raw = raw
            self._run = 1
        previous = self.confirmed
        self.confirmed = raw if self._run >= self.hold_ticks else None
        onset = self.confirmed is not None and self.confirmed != previous
        return self.confirmed, onset
