"""Small 2D vector type used throughout the simulator.

Plain-Python on purpose: the tick loop must be bit-reproducible across
machines, so no array-library arithmetic is involved in motion math.
"""

from __future__ import annotations

import math
from typing import NamedTuple

# Norms below this are treated as zero wherever a direction is normalized,
# so coincident agents never produce NaN.
ZERO_NORM_EPS = 1e-9


class Vec2(NamedTuple):
    x: float = 0.0
    y: float = 0.0

    def __add__(self, other: "Vec2") -> "Vec2":  # type: ignore[override]
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":  # type: ignore[override]
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__  # type: ignore[assignment]

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def normalized(self) -> "Vec2":
        """Unit vector, or (0, 0) when the norm is below ZERO_NORM_EPS."""
        n = self.norm()
        if n < ZERO_NORM_EPS:
            return Vec2(0.0, 0.0)
        return Vec2(self.x / n, self.y / n)

    def with_norm_capped(self, max_norm: float) -> "Vec2":
        """Rescale to max_norm if longer, otherwise unchanged."""
        n = self.norm()
        if n <= max_norm or n < ZERO_NORM_EPS:
            return self
        scale = max_norm / n
        return Vec2(self.x * scale, self.y * scale)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)
