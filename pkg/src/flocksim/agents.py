"""Agent and arena types shared by the motion terms and the engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .geometry import Vec2


class AgentKind(str, Enum):
    ROBOT = "robot"
    HUMAN = "human"


@dataclass
class AgentState:
    """One flock member. Humans and robots are treated uniformly by the
    motion terms; only the engine distinguishes them."""

    id: int
    kind: AgentKind
    position: Vec2
    velocity: Vec2 = field(default_factory=Vec2)
    heading: float = 0.0

    def validate(self) -> None:
        if not (self.position.is_finite() and self.velocity.is_finite()):
            raise ValueError(f"agent {self.id}: non-finite state")


@dataclass(frozen=True)
class BoundaryRegion:
    """Axis-aligned rectangle confining robot motion, with an inner margin
    used by the edge-avoidance term.

    margin_m defaults to min(width, length) / 15, i.e. 1 m for a 15x15 room.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    margin_m: float | None = None

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("boundary requires x_min < x_max and y_min < y_max")
        if self.margin_m is None:
            object.__setattr__(self, "margin_m", min(self.width, self.length) / 15.0)
        assert self.margin_m is not None
        if not (0.0 < self.margin_m < min(self.width, self.length) / 2.0):
            raise ValueError(
                f"margin_m must lie in (0, {min(self.width, self.length) / 2.0}), got {self.margin_m}"
            )

    @property
    def width(self) -> float:
        """Extent along x."""
        return self.x_max - self.x_min

    @property
    def length(self) -> float:
        """Extent along y."""
        return self.y_max - self.y_min

    @property
    def center(self) -> Vec2:
        return Vec2((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains(self, p: Vec2) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def within_band(self, p: Vec2, band_m: float = 5.0) -> bool:
        """True inside the boundary or within band_m of it (humans may
        wander slightly outside and stay tracked)."""
        return (
            self.x_min - band_m <= p.x <= self.x_max + band_m
            and self.y_min - band_m <= p.y <= self.y_max + band_m
        )

    def clamp_inside(self, p: Vec2, inset: float = 1e-9) -> Vec2:
        """Clamp a point strictly inside the rectangle."""
        x = min(self.x_max - inset, max(self.x_min + inset, p.x))
        y = min(self.y_max - inset, max(self.y_min + inset, p.y))
        return Vec2(x, y)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "y_min": self.y_min,
            "y_max": self.y_max,
            "margin_m": self.margin_m,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundaryRegion":
        return cls(
            x_min=float(d["x_min"]),
            x_max=float(d["x_max"]),
            y_min=float(d["y_min"]),
            y_max=float(d["y_max"]),
            margin_m=float(d["margin_m"]) if d.get("margin_m") is not None else None,
        )
