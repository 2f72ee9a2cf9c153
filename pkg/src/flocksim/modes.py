"""Weight modes: named 7-gain vectors applied to the base-motion terms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ModeId(str, Enum):
    """The seven selectable behaviors. Declaration order is the canonical
    tie-break order for classifier predictions."""

    DEFAULT = "default"
    FOLLOWING = "following"
    LINEAR = "linear"
    CIRCLING = "circling"
    COHESION = "cohesion"
    ALIGNMENT = "alignment"
    SEPARATION = "separation"


MODE_ORDER: tuple[ModeId, ...] = tuple(ModeId)

GAIN_NAMES = ("k_c", "k_s", "k_a", "k_phi", "k_pi", "k_lambda", "k_beta")


@dataclass(frozen=True)
class WeightMode:
    """Gains for cohesion, separation, alignment, follow, circling,
    linearity and bounds-aversion, in that order."""

    k_c: float = 0.0
    k_s: float = 0.0
    k_a: float = 0.0
    k_phi: float = 0.0
    k_pi: float = 0.0
    k_lambda: float = 0.0
    k_beta: float = 0.0

    def __post_init__(self) -> None:
        for name in GAIN_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"gain {name} must be finite and >= 0, got {v}")

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in GAIN_NAMES)

    @classmethod
    def from_list(cls, gains: list[float] | tuple[float, ...]) -> "WeightMode":
        if len(gains) != 7:
            raise ValueError(f"expected 7 gains, got {len(gains)}")
        return cls(*[float(g) for g in gains])


def default_mode_table() -> dict[ModeId, WeightMode]:
    """Shipped gain table. Every named mode weights its namesake term at 1.0
    plus edge avoidance; Default blends the human-aware gains. All values are
    configuration and may be overridden per run."""
    return {
        ModeId.DEFAULT: WeightMode(k_c=0.3, k_s=0.6, k_a=0.2, k_phi=0.4, k_beta=1.0),
        ModeId.FOLLOWING: WeightMode(k_phi=1.0, k_beta=1.0),
        ModeId.LINEAR: WeightMode(k_lambda=1.0, k_beta=1.0),
        ModeId.CIRCLING: WeightMode(k_pi=1.0, k_beta=1.0),
        ModeId.COHESION: WeightMode(k_c=1.0, k_beta=1.0),
        ModeId.ALIGNMENT: WeightMode(k_a=1.0, k_beta=1.0),
        ModeId.SEPARATION: WeightMode(k_s=1.0, k_beta=1.0),
    }


def mode_table_to_dict(table: dict[ModeId, WeightMode]) -> dict[str, list[float]]:
    return {mode.value: list(table[mode].as_tuple()) for mode in MODE_ORDER}


def mode_table_from_dict(d: dict) -> dict[ModeId, WeightMode]:
    table = {}
    for mode in MODE_ORDER:
        if mode.value not in d:
            raise ValueError(f"mode table missing entry for '{mode.value}'")
        table[mode] = WeightMode.from_list(d[mode.value])
    return table
