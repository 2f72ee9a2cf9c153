"""The seven base-motion terms and their weighted composition.

All functions are pure. Directions are normalized with a zero-norm guard:
anything shorter than ZERO_NORM_EPS yields (0, 0) instead of dividing by
zero (robot standing on the centroid, coincident agents, target reached).

Neighbor iteration is in ascending agent id. The separation accumulator is
renormalized after every contributing neighbor, which makes the result
order-dependent; fixing the order keeps runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .agents import AgentKind, AgentState, BoundaryRegion
from .geometry import ZERO_NORM_EPS, Vec2
from .modes import WeightMode

# Circling/linearity chase targets are capped at this offset norm (meters).
TARGET_STEP_CAP_M = 2.0


def _by_id(agents: list[AgentState]) -> list[AgentState]:
    return sorted(agents, key=lambda a: a.id)


def _find(agents: list[AgentState], i: int) -> AgentState:
    for a in agents:
        if a.id == i:
            return a
    raise KeyError(f"agent {i} not found")


def cohesion_term(agents: list[AgentState], i: int) -> Vec2:
    """Unit vector from agent i toward the mean position of all agents
    (including i itself)."""
    if not agents:
        raise ValueError("cohesion requires at least one agent")
    me = _find(agents, i)
    n = len(agents)
    mean = Vec2(
        sum(a.position.x for a in agents) / n,
        sum(a.position.y for a in agents) / n,
    )
    return (mean - me.position).normalized()


def separation_term(agents: list[AgentState], i: int, d_min: float) -> Vec2:
    """Repulsion away from neighbors closer than d_min.

    Each contributing neighbor adds -dx * (|dx| - d_min) and the accumulator
    is renormalized immediately after, matching the deployed update rule.
    Coincident neighbors (|dx| ~ 0) are skipped: their weighted offset is
    zero and renormalizing would be 0/0.
    """
    if d_min <= 0.0:
        raise ValueError("d_min must be positive")
    me = _find(agents, i)
    s = Vec2(0.0, 0.0)
    for other in _by_id(agents):
        if other.id == i:
            continue
        dx = me.position - other.position
        dist = dx.norm()
        if dist >= d_min or dist < ZERO_NORM_EPS:
            continue
        s = s - dx * (dist - d_min)
        s = s.normalized()
    return s


def alignment_term(agents: list[AgentState], i: int) -> Vec2:
    """Unit vector of the mean velocity of the *other* agents; (0, 0) when
    i is alone or everyone else is still."""
    _find(agents, i)
    others = [a for a in agents if a.id != i]
    if not others:
        return Vec2(0.0, 0.0)
    mean_v = Vec2(
        sum(a.velocity.x for a in others) / len(agents),
        sum(a.velocity.y for a in others) / len(agents),
    )
    return mean_v.normalized()


def follow_term(x_i: Vec2, x_human: Vec2) -> Vec2:
    """Unit vector from the robot toward the tracked human."""
    return (x_human - x_i).normalized()


def circling_term(
    i_index: int,
    n: int,
    t: float,
    x_i: Vec2,
    boundary: BoundaryRegion,
    period_s: float,
) -> Vec2:
    """Chase a target rotating around the region center.

    Robots are phase-spaced around the circle by i_index / n (rank among
    robots, robot count). The radius is 0.9 * min(length, width) / 2. The
    raw offset is returned when shorter than TARGET_STEP_CAP_M, otherwise
    scaled down to that norm.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= i_index < n:
        raise ValueError(f"i_index {i_index} outside [0, {n})")
    if period_s <= 0.0:
        raise ValueError("period_s must be positive")
    theta = 2.0 * math.pi * (t / period_s + i_index / n)
    r = 0.9 * min(boundary.length, boundary.width) / 2.0
    target = boundary.center + Vec2(r * math.cos(theta), r * math.sin(theta))
    offset = target - x_i
    if offset.norm() < TARGET_STEP_CAP_M:
        return offset
    return offset.normalized() * TARGET_STEP_CAP_M


def linearity_term(
    i: int,
    agents: list[AgentState],
    t: float,
    boundary: BoundaryRegion,
    period_s: float,
) -> Vec2:
    """Chase a target sweeping an ellipse-like path along a per-robot lane.

    Lanes order robots by current x (ties by id); humans get no lane and do
    not count toward the lane divisor. Same offset cap as circling.
    """
    if period_s <= 0.0:
        raise ValueError("period_s must be positive")
    me = _find(agents, i)
    if me.kind is not AgentKind.ROBOT:
        raise ValueError(f"agent {i} is not a robot; lanes apply to robots only")
    robots = [a for a in agents if a.kind is AgentKind.ROBOT]
    order = sorted(robots, key=lambda a: (a.position.x, a.id))
    lane = next(idx for idx, a in enumerate(order) if a.id == i)
    n = len(robots)
    theta = 2.0 * math.pi * t / period_s
    target = Vec2(
        0.75 * math.cos(theta) + boundary.width * lane / n + 2.0,
        boundary.center.y + (boundary.length / 2.0) * math.sin(theta),
    )
    offset = target - me.position
    if offset.norm() < TARGET_STEP_CAP_M:
        return offset
    return offset.normalized() * TARGET_STEP_CAP_M


def bounds_aversion_term(x_i: Vec2, boundary: BoundaryRegion) -> Vec2:
    """Pull back toward the margin box; exactly (0, 0) inside it."""
    m = boundary.margin_m
    assert m is not None
    clamped = Vec2(
        min(boundary.x_max - m, max(boundary.x_min + m, x_i.x)),
        min(boundary.y_max - m, max(boundary.y_min + m, x_i.y)),
    )
    return clamped - x_i


@dataclass(frozen=True)
class TermSet:
    """The seven term vectors computed for one robot on one tick."""

    cohesion: Vec2
    separation: Vec2
    alignment: Vec2
    follow: Vec2
    circling: Vec2
    linearity: Vec2
    bounds: Vec2

    ZERO: "TermSet" = None  # type: ignore[assignment]


TermSet.ZERO = TermSet(*([Vec2(0.0, 0.0)] * 7))  # type: ignore[misc]


def compose_step(terms: TermSet, mode: WeightMode) -> Vec2:
    """Weighted sum of the seven terms: the desired displacement for this
    tick before speed limiting."""
    return (
        terms.cohesion * mode.k_c
        + terms.separation * mode.k_s
        + terms.alignment * mode.k_a
        + terms.follow * mode.k_phi
        + terms.circling * mode.k_pi
        + terms.linearity * mode.k_lambda
        + terms.bounds * mode.k_beta
    )


def limit_step(delta: Vec2, v_max: float, dt: float) -> Vec2:
    """Cap a per-tick displacement at v_max * dt."""
    if v_max <= 0.0 or dt <= 0.0:
        raise ValueError("v_max and dt must be positive")
    return delta.with_norm_capped(v_max * dt)
