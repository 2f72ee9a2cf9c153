"""Geometric features summarizing a flock configuration for mode selection.

Three features, eight numbers total:
  - regional density: mean position scaled by the boundary maxima (2)
  - spread: per-robot spread values aggregated to mean and std (2)
  - line fit: least-squares cubic of y on x over all agents (4)

The cubic solves the normal equations in exact rational arithmetic, falling
back to a tiny ridge term when fewer than four distinct x values make them
singular. Exact arithmetic keeps feature values — and therefore replayed
mode predictions — identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .agents import AgentKind, AgentState, BoundaryRegion
from .geometry import Vec2

RIDGE_LAMBDA = 1e-8


@dataclass(frozen=True)
class FeatureVector:
    rho: Vec2
    sigma_mean: float
    sigma_std: float
    alpha: tuple[float, float, float, float]

    def as_tuple(self) -> tuple[float, ...]:
        return (self.rho.x, self.rho.y, self.sigma_mean, self.sigma_std) + self.alpha

    def validate(self) -> None:
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError("feature vector has non-finite components")
        if self.sigma_mean < 0.0 or self.sigma_std < 0.0:
            raise ValueError("spread aggregates must be non-negative")

    def to_dict(self) -> dict:
        return {
            "rho": [self.rho.x, self.rho.y],
            "sigma_mean": self.sigma_mean,
            "sigma_std": self.sigma_std,
            "alpha": list(self.alpha),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        return cls(
            rho=Vec2(float(d["rho"][0]), float(d["rho"][1])),
            sigma_mean=float(d["sigma_mean"]),
            sigma_std=float(d["sigma_std"]),
            alpha=tuple(float(a) for a in d["alpha"]),  # type: ignore[arg-type]
        )


def regional_density(agents: list[AgentState], boundary: BoundaryRegion) -> Vec2:
    """Mean agent position divided component-wise by (x_max, y_max).

    The divisor is the raw maxima, not the extent, so the value is only
    confined to [0, 1] for regions anchored at the origin.
    """
    if not agents:
        raise ValueError("regional density requires at least one agent")
    if boundary.x_max == 0.0 or boundary.y_max == 0.0:
        raise ValueError("regional density undefined for a zero boundary maximum")
    n = len(agents)
    mean_x = sum(a.position.x for a in agents) / n
    mean_y = sum(a.position.y for a in agents) / n
    return Vec2(mean_x / boundary.x_max, mean_y / boundary.y_max)


def measure_of_spread(agents: list[AgentState], i: int) -> float:
    """(1/n) * || sum over j != i of (x_i - x_j) ||."""
    me = None
    sx = sy = 0.0
    for a in agents:
        if a.id == i:
            me = a
    if me is None:
        raise KeyError(f"agent {i} not found")
    for a in agents:
        if a.id != i:
            sx += me.position.x - a.position.x
            sy += me.position.y - a.position.y
    return math.hypot(sx, sy) / len(agents)


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over Fractions. Raises on a singular system."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = m[col][col]
        m[col] = [v / inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [vr - factor * vc for vr, vc in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def best_fit_cubic(agents: list[AgentState]) -> tuple[float, float, float, float]:
    """Least-squares cubic coefficients (a0, a1, a2, a3) of y on
    (1, x, x^2, x^3) via the normal equations.

    With fewer than four distinct x values the normal matrix is singular;
    a ridge term RIDGE_LAMBDA * I then selects a well-defined solution.
    """
    if not agents:
        raise ValueError("cubic fit requires at least one agent")
    xs = [Fraction(a.position.x) for a in agents]
    ys = [Fraction(a.position.y) for a in agents]
    powers = [[x**k for k in range(4)] for x in xs]
    xtx = [
        [sum(p[r] * p[c] for p in powers) for c in range(4)]
        for r in range(4)
    ]
    xty = [sum(p[r] * y for p, y in zip(powers, ys)) for r in range(4)]
    if len(set(xs)) < 4:
        lam = Fraction(RIDGE_LAMBDA)
        for r in range(4):
            xtx[r][r] += lam
    coeffs = _solve_exact(xtx, xty)
    return tuple(float(c) for c in coeffs)  # type: ignore[return-value]


def build_feature_vector(agents: list[AgentState], boundary: BoundaryRegion) -> FeatureVector:
    """Assemble the 8-component feature vector for one tick.

    Density and the line fit run over every agent; the spread aggregate
    (mean, population std) runs over robot spread values only.
    """
    if not agents:
        raise ValueError("feature vector requires at least one agent")
    rho = regional_density(agents, boundary)
    alpha = best_fit_cubic(agents)
    sigmas = [measure_of_spread(agents, a.id) for a in agents if a.kind is AgentKind.ROBOT]
    if sigmas:
        mean = sum(sigmas) / len(sigmas)
        std = math.sqrt(sum((s - mean) ** 2 for s in sigmas) / len(sigmas))
    else:
        mean = std = 0.0
    fv = FeatureVector(rho=rho, sigma_mean=mean, sigma_std=std, alpha=alpha)
    fv.validate()
    return fv
