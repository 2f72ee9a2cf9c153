"""The fixed-timestep simulation loop.

Each tick runs the subservices in a fixed order: apply queued commands,
perceive humans and classify gestures, advance gesture responses, pick
gaze targets, let the active condition update the weight mode, compute the
motion terms for every robot against the same pre-move state, integrate
under the speed cap, then refresh lights and the arm service.

The engine is single-owner: one logical thread calls step(); commands
arrive through apply_command and take effect at the start of the next
tick (Start/Pause act immediately — a paused engine runs no ticks that
could drain a queue). Identical (config, seed, command sequence) yields an
identical snapshot stream, which is what makes logs replayable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .agents import AgentKind, AgentState, BoundaryRegion
from .commands import (
    Ack,
    AddHuman,
    Command,
    Condition,
    ConditionKind,
    MoveHuman,
    Pause,
    RemoveHuman,
    SetCondition,
    SetGesture,
    SetMode,
    Start,
    command_to_dict,
)
from .classifier import Model, predict_mode
from .features import build_feature_vector
from .geometry import ZERO_NORM_EPS, Vec2
from .gestures import DEBOUNCE_TICKS, Gesture, GestureDebouncer, classify_gesture, keypoints_for_pose
from .modes import ModeId, WeightMode, default_mode_table, mode_table_from_dict, mode_table_to_dict
from .responses import (
    ArmState,
    GazeTarget,
    LightColor,
    ResponseAction,
    ResponseKind,
    SoundEvent,
    Subsystem,
    arm_service_tick,
    begin_response,
    head_targets,
    light_color,
    tick_response,
    RESPONSE_SUBSYSTEM,
    GESTURE_RESPONSE,
    SPIN_RATE_RAD_S,
)
from .rng import SplitMix64
from .sessionlog import KIND_RANK, LogRecord, RecordKind, state_hash
from .terms import (
    TermSet,
    alignment_term,
    bounds_aversion_term,
    circling_term,
    cohesion_term,
    compose_step,
    follow_term,
    limit_step,
    linearity_term,
    separation_term,
)

MAX_ROBOTS = 10
TWO_PI = 2.0 * math.pi

CONTROL_CYCLE: tuple[ModeId, ...] = (ModeId.COHESION, ModeId.SEPARATION, ModeId.ALIGNMENT)

_SUBSYSTEM_ORDER = tuple(Subsystem)


@dataclass(frozen=True)
class EngineConfig:
    boundary: BoundaryRegion
    tick_hz: float = 20.0
    v_max: float = 1.0
    d_min: float = 1.5
    circling_period_s: float = 50.0
    linearity_period_s: float = 37.0
    mode_table: dict[ModeId, WeightMode] = field(default_factory=default_mode_table)
    seed: int = 0
    model_interval_s: float = 30.0
    control_cycle_s: float = 30.0
    detection_dropout: float = 0.0
    debounce_ticks: int = DEBOUNCE_TICKS
    spin_denial_radius_m: float | None = None  # defaults to d_min

    def __post_init__(self) -> None:
        if self.tick_hz <= 0:
            raise ValueError("tick_hz must be positive")
        for name in ("v_max", "d_min", "circling_period_s", "linearity_period_s",
                     "model_interval_s", "control_cycle_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.detection_dropout < 1.0:
            raise ValueError("detection_dropout must lie in [0, 1)")
        if self.debounce_ticks < 1:
            raise ValueError("debounce_ticks must be >= 1")
        missing = [m.value for m in ModeId if m not in self.mode_table]
        if missing:
            raise ValueError(f"mode_table missing modes: {', '.join(missing)}")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_hz

    @property
    def denial_radius(self) -> float:
        return self.d_min if self.spin_denial_radius_m is None else self.spin_denial_radius_m

    def to_dict(self) -> dict:
        return {
            "boundary": self.boundary.to_dict(),
            "tick_hz": self.tick_hz,
            "v_max": self.v_max,
            "d_min": self.d_min,
            "circling_period_s": self.circling_period_s,
            "linearity_period_s": self.linearity_period_s,
            "mode_table": mode_table_to_dict(self.mode_table),
            "seed": self.seed,
            "model_interval_s": self.model_interval_s,
            "control_cycle_s": self.control_cycle_s,
            "detection_dropout": self.detection_dropout,
            "debounce_ticks": self.debounce_ticks,
            "spin_denial_radius_m": self.spin_denial_radius_m,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        return cls(
            boundary=BoundaryRegion.from_dict(d["boundary"]),
            tick_hz=float(d["tick_hz"]),
            v_max=float(d["v_max"]),
            d_min=float(d["d_min"]),
            circling_period_s=float(d["circling_period_s"]),
            linearity_period_s=float(d["linearity_period_s"]),
            mode_table=mode_table_from_dict(d["mode_table"]),
            seed=int(d["seed"]),
            model_interval_s=float(d["model_interval_s"]),
            control_cycle_s=float(d["control_cycle_s"]),
            detection_dropout=float(d.get("detection_dropout", 0.0)),
            debounce_ticks=int(d.get("debounce_ticks", DEBOUNCE_TICKS)),
            spin_denial_radius_m=(
                float(d["spin_denial_radius_m"])
                if d.get("spin_denial_radius_m") is not None
                else None
            ),
        )


@dataclass(frozen=True)
class FlockSnapshot:
    """Immutable view of one tick. Snapshot 0 is the constructed state;
    snapshot k is the state after k executed ticks."""

    tick: int
    sim_time_s: float
    agents: tuple[AgentState, ...]
    active_mode: ModeId
    condition: Condition | None
    responses: tuple[ResponseAction, ...]
    gaze: tuple[GazeTarget, ...]
    lights: dict[int, LightColor]
    gesture_onsets: tuple[tuple[int, Gesture], ...]
    running: bool
    error: str | None

    @property
    def robots(self) -> list[AgentState]:
        return [a for a in self.agents if a.kind is AgentKind.ROBOT]

    @property
    def humans(self) -> list[AgentState]:
        return [a for a in self.agents if a.kind is AgentKind.HUMAN]

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "sim_time_s": self.sim_time_s,
            "agents": [
                {
                    "id": a.id,
                    "kind": a.kind.value,
                    "x": a.position.x,
                    "y": a.position.y,
                    "vx": a.velocity.x,
                    "vy": a.velocity.y,
                    "heading": a.heading,
                }
                for a in self.agents
            ],
            "active_mode": self.active_mode.value,
            "condition": self.condition.to_dict() if self.condition else None,
            "responses": [r.to_dict() for r in self.responses],
            "gaze": [g.to_dict() for g in self.gaze],
            "lights": {str(rid): c.value for rid, c in sorted(self.lights.items())},
            "gesture_onsets": [
                {"human_id": hid, "gesture": g.value} for hid, g in self.gesture_onsets
            ],
            "running": self.running,
            "error": self.error,
        }

    def hash(self) -> str:
        return state_hash(self.to_dict())


@dataclass
class _Robot:
    id: int
    position: Vec2
    velocity: Vec2 = field(default_factory=Vec2)
    heading: float = 0.0
    responses: dict[Subsystem, ResponseAction] = field(default_factory=dict)
    arm: ArmState = field(default_factory=ArmState)
    light: LightColor = LightColor.LIGHT_BLUE


@dataclass
class _Human:
    id: int
    position: Vec2
    prev_position: Vec2
    velocity: Vec2 = field(default_factory=Vec2)
    heading: float = 0.0
    held_gesture: Gesture | None = None
    debouncer: GestureDebouncer = field(default_factory=GestureDebouncer)


class Engine:
    """Owns all mutable simulation state. See the module docstring for the
    per-tick subservice order."""

    def __init__(
        self,
        config: EngineConfig,
        robots: list[Vec2],
        model: Model | None = None,
    ) -> None:
        if not 1 <= len(robots) <= MAX_ROBOTS:
            raise ValueError(f"robot count must be 1..{MAX_ROBOTS}, got {len(robots)}")
        for idx, pos in enumerate(robots):
            if not pos.is_finite() or not config.boundary.contains(pos):
                raise ValueError(f"robot {idx} initial position {pos} outside boundary")
        self.config = config
        self.initial_robot_positions = [Vec2(p.x, p.y) for p in robots]
        self.model = model
        self.rng = SplitMix64(config.seed)
        self._robots: dict[int, _Robot] = {}
        for idx, pos in enumerate(robots):
            arm = ArmState(trajectory_id=self.rng.randint_below(4))
            self._robots[idx] = _Robot(id=idx, position=pos, arm=arm)
        self._humans: dict[int, _Human] = {}
        self.active_mode = ModeId.DEFAULT
        self.condition: Condition | None = None
        self._condition_start_t = 0.0
        self._last_prediction_slot = 0
        self.tick = 0
        self.running = True
        self.error: str | None = None
        self._queue: list[Command] = []
        self._records: list[LogRecord] = []
        self._gaze: list[GazeTarget] = []
        self.latest_snapshot = self._build_snapshot(onsets=[])

    # ------------------------------------------------------------------ #
    # commands

    def apply_command(self, cmd: Command) -> Ack:
        """Validate and accept a command. Accepted commands take effect at
        the start of the next tick; Start/Pause act immediately (the tick
        loop may be idle). Validation runs against the projected state so
        same-batch sequences like add-then-move succeed."""
        if isinstance(cmd, Start):
            if self.error is not None:
                return Ack.no(f"engine in error state: {self.error}")
            self.running = True
            self._record_command(cmd)
            return Ack.yes()
        if isinstance(cmd, Pause):
            self.running = False
            self._record_command(cmd)
            return Ack.yes()

        human_ids, condition = self._projected_state()
        if isinstance(cmd, SetMode):
            if condition is not None and condition.kind in (
                ConditionKind.CONTROL,
                ConditionKind.MODEL_PREDICTION,
            ):
                return Ack.no(f"mode is owned by the {condition.kind.value} condition")
        elif isinstance(cmd, AddHuman):
            if cmd.human_id in human_ids or cmd.human_id in self._robots:
                return Ack.no(f"agent id {cmd.human_id} already in use")
            bad = self._position_problem(cmd.position)
            if bad:
                return Ack.no(bad)
        elif isinstance(cmd, (MoveHuman, RemoveHuman, SetGesture)):
            if cmd.human_id not in human_ids:
                return Ack.no(f"unknown human id {cmd.human_id}")
            if isinstance(cmd, MoveHuman):
                bad = self._position_problem(cmd.position)
                if bad:
                    return Ack.no(bad)
        elif not isinstance(cmd, SetCondition):
            return Ack.no(f"unsupported command {type(cmd).__name__}")

        self._queue.append(cmd)
        return Ack.yes()

    def _position_problem(self, p: Vec2) -> str | None:
        if not p.is_finite():
            return "position must be finite"
        if not self.config.boundary.within_band(p):
            return "position outside the 5 m tracking band around the boundary"
        return None

    def _projected_state(self) -> tuple[set[int], Condition | None]:
        """Human ids and condition as they will stand once the current
        queue has been applied."""
        ids = set(self._humans)
        condition = self.condition
        for cmd in self._queue:
            if isinstance(cmd, AddHuman):
                ids.add(cmd.human_id)
            elif isinstance(cmd, RemoveHuman):
                ids.discard(cmd.human_id)
            elif isinstance(cmd, SetCondition):
                condition = cmd.condition
        return ids, condition

    def _record_command(self, cmd: Command) -> None:
        self._records.append(
            LogRecord(tick=self.tick + 1, kind=RecordKind.COMMAND, payload=command_to_dict(cmd))
        )

    # ------------------------------------------------------------------ #
    # stepping

    def step(self) -> FlockSnapshot:
        if not self.running:
            detail = f": {self.error}" if self.error else ""
            raise RuntimeError(f"engine is paused{detail}")
        tick = self.tick + 1
        t = (tick - 1) * self.config.dt
        dt = self.config.dt

        self._apply_queued(tick, t)
        self._update_human_motion(dt)
        onsets = self._gesture_pipeline()
        spinning = self._response_pipeline(onsets, tick, dt)
        self._gaze = self._head_controller()
        self._condition_tick(t)
        self._motion(t, dt, spinning)
        self._lights_and_arm(tick, dt)

        self.tick = tick
        snapshot = self._build_snapshot(onsets)
        self.latest_snapshot = snapshot
        self._prune_responses()
        return snapshot

    def drain_records(self) -> list[LogRecord]:
        """Records emitted since the last drain, in canonical (tick, kind)
        order. A SetMode's training label is emitted mid-drain, so the
        stable per-kind sort restores the writer's ordering contract."""
        out = self._records
        self._records = []
        out.sort(key=lambda r: (r.tick, KIND_RANK[r.kind]))
        return out

    # -- subservices ---------------------------------------------------- #

    def _apply_queued(self, tick: int, t: float) -> None:
        queue, self._queue = self._queue, []
        for cmd in queue:
            self._records.append(
                LogRecord(tick=tick, kind=RecordKind.COMMAND, payload=command_to_dict(cmd))
            )
            if isinstance(cmd, AddHuman):
                self._humans[cmd.human_id] = _Human(
                    id=cmd.human_id,
                    position=cmd.position,
                    prev_position=cmd.position,
                    debouncer=GestureDebouncer(self.config.debounce_ticks),
                )
            elif isinstance(cmd, MoveHuman):
                self._humans[cmd.human_id].position = cmd.position
            elif isinstance(cmd, RemoveHuman):
                del self._humans[cmd.human_id]
            elif isinstance(cmd, SetGesture):
                self._humans[cmd.human_id].held_gesture = cmd.gesture
            elif isinstance(cmd, SetMode):
                self.active_mode = cmd.mode
                if (
                    self.condition is not None
                    and self.condition.kind is ConditionKind.HUMAN_CHOREOGRAPHER
                ):
                    features = build_feature_vector(self._agent_list(), self.config.boundary)
                    self._records.append(
                        LogRecord(
                            tick=tick,
                            kind=RecordKind.TRAINING_LABEL,
                            payload={"label": cmd.mode.value, "features": features.to_dict()},
                        )
                    )
            elif isinstance(cmd, SetCondition):
                self.condition = cmd.condition
                self._condition_start_t = t
                self._last_prediction_slot = 0
                if cmd.condition.kind is ConditionKind.FIXED:
                    assert cmd.condition.fixed_mode is not None
                    self.active_mode = cmd.condition.fixed_mode
                elif cmd.condition.kind is ConditionKind.MODEL_PREDICTION and self.model is None:
                    self.error = "model prediction condition requires a loaded model"
                    self.running = False

    def _update_human_motion(self, dt: float) -> None:
        for hid in sorted(self._humans):
            h = self._humans[hid]
            h.velocity = (h.position - h.prev_position) * (1.0 / dt)
            h.prev_position = h.position
            if h.velocity.norm() > ZERO_NORM_EPS:
                h.heading = math.atan2(h.velocity.y, h.velocity.x) % TWO_PI

    def _in_region_ids(self) -> list[int]:
        return [
            hid
            for hid in sorted(self._humans)
            if self.config.boundary.contains(self._humans[hid].position)
        ]

    def _gesture_pipeline(self) -> list[tuple[int, Gesture]]:
        onsets = []
        in_region = set(self._in_region_ids())
        for hid in sorted(self._humans):
            h = self._humans[hid]
            raw = None
            if hid in in_region:
                raw = classify_gesture(keypoints_for_pose(hid, h.position, h.held_gesture))
            confirmed, onset = h.debouncer.update(raw)
            if onset:
                assert confirmed is not None
                onsets.append((hid, confirmed))
        return onsets

    def _response_pipeline(
        self, onsets: list[tuple[int, Gesture]], tick: int, dt: float
    ) -> set[int]:
        positions = {rid: r.position for rid, r in sorted(self._robots.items())}
        for _, gesture in onsets:
            wanted = RESPONSE_SUBSYSTEM[GESTURE_RESPONSE[gesture]]
            for rid in sorted(self._robots):
                robot = self._robots[rid]
                if wanted in robot.responses:
                    continue  # busy subsystem finishes its current response
                action = begin_response(
                    rid, gesture, positions, self.config.denial_radius, tick
                )
                robot.responses[action.subsystem] = action
                self._records.append(
                    LogRecord(
                        tick=tick,
                        kind=RecordKind.SOUND_EVENT,
                        payload=SoundEvent(
                            tick, rid, action.subsystem.value, action.kind.value
                        ).to_dict(),
                    )
                )
        spinning = set()
        for rid in sorted(self._robots):
            robot = self._robots[rid]
            for sub in _SUBSYSTEM_ORDER:
                action = robot.responses.get(sub)
                if action is None:
                    continue
                if action.kind is ResponseKind.SPIN_IN_PLACE:
                    spinning.add(rid)
                    robot.heading = (robot.heading + SPIN_RATE_RAD_S * dt) % TWO_PI
                tick_response(action, dt)
        return spinning

    def _head_controller(self) -> list[GazeTarget]:
        positions = {rid: r.position for rid, r in self._robots.items()}
        humans = [
            (hid, self._humans[hid].position, self._humans[hid].debouncer.confirmed is not None)
            for hid in self._in_region_ids()
        ]
        return head_targets(positions, humans)

    def _condition_tick(self, t: float) -> None:
        if self.condition is None:
            return
        elapsed = t - self._condition_start_t
        if self.condition.kind is ConditionKind.CONTROL:
            slot = int((elapsed + 1e-9) // self.config.control_cycle_s)
            self.active_mode = CONTROL_CYCLE[slot % len(CONTROL_CYCLE)]
        elif self.condition.kind is ConditionKind.MODEL_PREDICTION:
            slot = int((elapsed + 1e-9) // self.config.model_interval_s)
            if slot >= 1 and slot > self._last_prediction_slot:
                self._last_prediction_slot = slot
                assert self.model is not None
                features = build_feature_vector(self._agent_list(), self.config.boundary)
                self.active_mode = predict_mode(self.model, features)

    def _agent_list(self) -> list[AgentState]:
        """Robots plus in-region humans, ascending id: the agent set every
        motion and feature calculation runs over."""
        agents = [
            AgentState(r.id, AgentKind.ROBOT, r.position, r.velocity, r.heading)
            for r in self._robots.values()
        ]
        for hid in self._in_region_ids():
            h = self._humans[hid]
            agents.append(AgentState(h.id, AgentKind.HUMAN, h.position, h.velocity, h.heading))
        agents.sort(key=lambda a: a.id)
        return agents

    def _motion(self, t: float, dt: float, spinning: set[int]) -> None:
        cfg = self.config
        gains = cfg.mode_table[self.active_mode]
        all_agents = self._agent_list()
        robot_ids = sorted(self._robots)
        rank = {rid: idx for idx, rid in enumerate(robot_ids)}
        n_robots = len(robot_ids)

        deltas: dict[int, Vec2] = {}
        for rid in robot_ids:
            robot = self._robots[rid]
            agents = all_agents
            if cfg.detection_dropout > 0.0:
                agents = [
                    a
                    for a in all_agents
                    if a.kind is AgentKind.ROBOT
                    or self.rng.random() >= cfg.detection_dropout
                ]
            first_human = next((a for a in agents if a.kind is AgentKind.HUMAN), None)
            terms = TermSet(
                cohesion=cohesion_term(agents, rid),
                separation=separation_term(agents, rid, cfg.d_min),
                alignment=alignment_term(agents, rid),
                follow=(
                    follow_term(robot.position, first_human.position)
                    if first_human is not None
                    else Vec2(0.0, 0.0)
                ),
                circling=circling_term(
                    rank[rid], n_robots, t, robot.position, cfg.boundary, cfg.circling_period_s
                ),
                linearity=linearity_term(rid, agents, t, cfg.boundary, cfg.linearity_period_s),
                bounds=bounds_aversion_term(robot.position, cfg.boundary),
            )
            if rid in spinning:
                deltas[rid] = Vec2(0.0, 0.0)
            else:
                deltas[rid] = limit_step(compose_step(terms, gains), cfg.v_max, dt)

        for rid in robot_ids:
            robot = self._robots[rid]
            new_pos = cfg.boundary.clamp_inside(robot.position + deltas[rid])
            actual = new_pos - robot.position
            robot.position = new_pos
            robot.velocity = actual * (1.0 / dt)
            if rid not in spinning and actual.norm() > ZERO_NORM_EPS:
                robot.heading = math.atan2(actual.y, actual.x) % TWO_PI

    def _lights_and_arm(self, tick: int, dt: float) -> None:
        humans_present = bool(self._in_region_ids())
        for rid in sorted(self._robots):
            robot = self._robots[rid]
            robot.light = light_color(list(robot.responses.values()), humans_present)
            if arm_service_tick(robot.arm, dt, self.rng):
                self._records.append(
                    LogRecord(
                        tick=tick,
                        kind=RecordKind.SOUND_EVENT,
                        payload=SoundEvent(
                            tick, rid, "arm", f"trajectory_{robot.arm.trajectory_id}"
                        ).to_dict(),
                    )
                )

    def _prune_responses(self) -> None:
        for robot in self._robots.values():
            robot.responses = {
                sub: a
                for sub, a in robot.responses.items()
                if a.elapsed_s < a.duration_s
            }

    # ------------------------------------------------------------------ #

    def _build_snapshot(self, onsets: list[tuple[int, Gesture]]) -> FlockSnapshot:
        agents = [
            AgentState(r.id, AgentKind.ROBOT, r.position, r.velocity, r.heading)
            for r in self._robots.values()
        ]
        for hid in sorted(self._humans):
            h = self._humans[hid]
            agents.append(AgentState(h.id, AgentKind.HUMAN, h.position, h.velocity, h.heading))
        agents.sort(key=lambda a: a.id)
        responses = []
        for rid in sorted(self._robots):
            for sub in _SUBSYSTEM_ORDER:
                action = self._robots[rid].responses.get(sub)
                if action is not None:
                    responses.append(replace(action))
        return FlockSnapshot(
            tick=self.tick,
            sim_time_s=self.tick * self.config.dt,
            agents=tuple(agents),
            active_mode=self.active_mode,
            condition=self.condition,
            responses=tuple(responses),
            gaze=tuple(self._gaze),
            lights={rid: self._robots[rid].light for rid in sorted(self._robots)},
            gesture_onsets=tuple(onsets),
            running=self.running,
            error=self.error,
        )
