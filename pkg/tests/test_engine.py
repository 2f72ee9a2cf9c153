import math
import random

import pytest

from flocksim.agents import AgentKind, BoundaryRegion
from flocksim.commands import (
    AddHuman,
    Condition,
    ConditionKind,
    MoveHuman,
    Pause,
    RemoveHuman,
    SetCondition,
    SetGesture,
    SetMode,
    Start,
)
from flocksim.classifier import Model
from flocksim.engine import Engine, EngineConfig
from flocksim.geometry import Vec2
from flocksim.gestures import Gesture
from flocksim.modes import MODE_ORDER, ModeId, WeightMode, default_mode_table
from flocksim.responses import LightColor, ResponseKind

BOX15 = BoundaryRegion(0, 15, 0, 15)
BOX10 = BoundaryRegion(0, 10, 0, 10)


def make_engine(robots=None, boundary=BOX15, model=None, **config_kwargs):
    config = EngineConfig(boundary=boundary, **config_kwargs)
    robots = robots if robots is not None else [Vec2(4, 4), Vec2(8, 8)]
    return Engine(config, robots, model=model)


def stationary_table():
    """All motion gains zero: robots hold position, responses still run."""
    table = default_mode_table()
    table[ModeId.DEFAULT] = WeightMode()
    return table


def constant_model(mode: ModeId) -> Model:
    weights = [[0.0] * 9 for _ in range(7)]
    weights[MODE_ORDER.index(mode)] = [0.0] * 8 + [5.0]
    return Model(
        weights=weights,
        feature_mean=[0.0] * 8,
        feature_std=[1.0] * 8,
        constant_features=[False] * 8,
    )


class TestConstruction:
    def test_six_robots_valid(self):
        engine = make_engine([Vec2(2 + i, 2 + i) for i in range(6)])
        snap = engine.latest_snapshot
        assert snap.tick == 0
        assert snap.active_mode is ModeId.DEFAULT
        assert len(snap.robots) == 6

    def test_zero_robots_rejected(self):
        with pytest.raises(ValueError, match="robot count"):
            make_engine([])

    def test_eleven_robots_rejected(self):
        with pytest.raises(ValueError, match="robot count"):
            make_engine([Vec2(1 + i, 1) for i in range(11)])

    def test_robot_outside_boundary_rejected(self):
        with pytest.raises(ValueError, match="outside boundary"):
            make_engine([Vec2(20, 20)])


class TestCommands:
    def test_add_then_move_same_batch(self):
        engine = make_engine()
        assert engine.apply_command(AddHuman(100, Vec2(5, 5))).ok
        assert engine.apply_command(MoveHuman(100, Vec2(6, 6))).ok
        engine.step()
        human = next(a for a in engine.latest_snapshot.agents if a.id == 100)
        assert human.position == Vec2(6, 6)

    def test_move_unknown_human(self):
        engine = make_engine()
        ack = engine.apply_command(MoveHuman(42, Vec2(5, 5)))
        assert not ack.ok and "unknown human" in ack.detail

    def test_duplicate_agent_id(self):
        engine = make_engine()  # robots get ids 0 and 1
        assert not engine.apply_command(AddHuman(0, Vec2(5, 5))).ok
        engine.apply_command(AddHuman(100, Vec2(5, 5)))
        assert not engine.apply_command(AddHuman(100, Vec2(6, 6))).ok

    def test_human_position_band(self):
        engine = make_engine()
        assert engine.apply_command(AddHuman(100, Vec2(-4, 7))).ok  # inside 5 m band
        ack = engine.apply_command(AddHuman(101, Vec2(-9, 7)))
        assert not ack.ok and "band" in ack.detail

    def test_command_applies_next_tick(self):
        engine = make_engine()
        engine.step()
        engine.apply_command(SetMode(ModeId.CIRCLING))
        assert engine.latest_snapshot.active_mode is ModeId.DEFAULT
        engine.step()
        assert engine.latest_snapshot.active_mode is ModeId.CIRCLING

    def test_set_mode_rejected_under_control(self):
        engine = make_engine()
        engine.apply_command(SetCondition(Condition(ConditionKind.CONTROL)))
        engine.step()
        ack = engine.apply_command(SetMode(ModeId.LINEAR))
        assert not ack.ok and "owned" in ack.detail

    def test_set_mode_rejected_in_same_batch_as_control(self):
        engine = make_engine()
        engine.apply_command(SetCondition(Condition(ConditionKind.CONTROL)))
        assert not engine.apply_command(SetMode(ModeId.LINEAR)).ok

    def test_choreographer_set_mode_records_label(self):
        engine = make_engine()
        engine.apply_command(SetCondition(Condition(ConditionKind.HUMAN_CHOREOGRAPHER)))
        engine.step()
        engine.drain_records()
        engine.apply_command(SetMode(ModeId.FOLLOWING))
        engine.step()
        records = engine.drain_records()
        labels = [r for r in records if r.kind.value == "training_label"]
        assert len(labels) == 1
        assert labels[0].payload["label"] == "following"
        assert len(labels[0].payload["features"]["alpha"]) == 4

    def test_pause_and_start(self):
        engine = make_engine()
        engine.apply_command(Pause())
        assert not engine.running
        with pytest.raises(RuntimeError, match="paused"):
            engine.step()
        engine.apply_command(Start())
        assert engine.running
        engine.step()
        assert engine.tick == 1


class TestConditions:
    def test_control_schedule(self):
        engine = make_engine(tick_hz=20.0)
        engine.apply_command(SetCondition(Condition(ConditionKind.CONTROL)))
        expected = {
            1: ModeId.COHESION,      # t=0
            620: ModeId.SEPARATION,  # t=31 s
            1220: ModeId.ALIGNMENT,  # t=61 s
            1820: ModeId.COHESION,   # t=91 s
        }
        for tick in range(1, 1821):
            snap = engine.step()
            if tick in expected:
                assert snap.active_mode is expected[tick], f"tick {tick}"

    def test_control_boundaries_exact(self):
        engine = make_engine(tick_hz=20.0)
        engine.apply_command(SetCondition(Condition(ConditionKind.CONTROL)))
        modes = [engine.step().active_mode for _ in range(1800)]
        assert modes.count(ModeId.COHESION) == 600
        assert modes.count(ModeId.SEPARATION) == 600
        assert modes.count(ModeId.ALIGNMENT) == 600
        assert modes[599] is ModeId.COHESION and modes[600] is ModeId.SEPARATION

    def test_fixed_mode_forever(self):
        engine = make_engine()
        engine.apply_command(
            SetCondition(Condition(ConditionKind.FIXED, fixed_mode=ModeId.LINEAR))
        )
        for _ in range(50):
            assert engine.step().active_mode is ModeId.LINEAR

    def test_model_prediction_at_interval(self):
        engine = make_engine(model=constant_model(ModeId.CIRCLING))
        engine.apply_command(SetCondition(Condition(ConditionKind.MODEL_PREDICTION)))
        for tick in range(1, 601):  # through t=30 s
            snap = engine.step()
        assert snap.active_mode is ModeId.DEFAULT  # tick 600 starts at 29.95
        snap = engine.step()  # tick 601 starts at 30.0
        assert snap.active_mode is ModeId.CIRCLING

    def test_model_prediction_without_model_pauses(self):
        engine = make_engine()
        ack = engine.apply_command(SetCondition(Condition(ConditionKind.MODEL_PREDICTION)))
        assert ack.ok
        snap = engine.step()
        assert snap.error is not None and "model" in snap.error
        assert not engine.running
        assert not engine.apply_command(Start()).ok


class TestStepDynamics:
    def test_zero_gain_mode_freezes_positions(self):
        engine = make_engine(mode_table=stationary_table())
        before = [a.position for a in engine.latest_snapshot.robots]
        for _ in range(20):
            engine.step()
        after = [a.position for a in engine.latest_snapshot.robots]
        assert before == after

    def test_determinism_bitwise(self):
        def run():
            engine = make_engine(seed=77)
            engine.apply_command(AddHuman(100, Vec2(7, 7)))
            hashes = []
            for tick in range(1, 1001):
                if tick == 100:
                    engine.apply_command(MoveHuman(100, Vec2(3, 3)))
                if tick == 200:
                    engine.apply_command(SetGesture(100, Gesture.RIGHT_HAND_UP))
                if tick == 500:
                    engine.apply_command(SetMode(ModeId.SEPARATION))
                hashes.append(engine.step().hash())
            return hashes

        assert run() == run()

    def test_speed_cap(self):
        engine = make_engine(v_max=1.0, tick_hz=20.0)
        engine.apply_command(SetMode(ModeId.COHESION))
        prev = {a.id: a.position for a in engine.latest_snapshot.robots}
        for _ in range(200):
            snap = engine.step()
            for a in snap.robots:
                moved = a.position.distance_to(prev[a.id])
                assert moved <= 1.0 / 20.0 + 1e-9
                prev[a.id] = a.position

    def test_containment(self):
        engine = make_engine(
            robots=[Vec2(0.5, 0.5), Vec2(14.5, 14.5)],
            mode_table={m: WeightMode(k_c=5, k_s=5, k_a=5, k_phi=5, k_pi=5, k_lambda=5, k_beta=5) for m in ModeId},
        )
        for _ in range(500):
            snap = engine.step()
            for a in snap.robots:
                assert 0 < a.position.x < 15 and 0 < a.position.y < 15

    def test_circling_convergence(self):
        """Pure rotation gains: a lone robot settles onto the circle."""
        table = default_mode_table()
        table[ModeId.CIRCLING] = WeightMode(k_pi=1.0)
        engine = make_engine(
            robots=[Vec2(5, 5)], boundary=BOX10, mode_table=table, tick_hz=20.0
        )
        engine.apply_command(
            SetCondition(Condition(ConditionKind.FIXED, fixed_mode=ModeId.CIRCLING))
        )
        distances = []
        for tick in range(1, 4001):
            snap = engine.step()
            if tick > 3000:  # last 50 s of 200 s
                pos = snap.robots[0].position
                distances.append(pos.distance_to(Vec2(5, 5)))
        mean_d = sum(distances) / len(distances)
        assert abs(mean_d - 4.5) <= 0.15 * 4.5

    def test_human_velocity_from_moves(self):
        engine = make_engine(mode_table=stationary_table(), tick_hz=20.0)
        engine.apply_command(AddHuman(100, Vec2(5, 5)))
        engine.step()
        engine.apply_command(MoveHuman(100, Vec2(5.1, 5)))
        snap = engine.step()
        human = next(a for a in snap.agents if a.id == 100)
        assert human.velocity.x == pytest.approx(0.1 / 0.05)
        snap = engine.step()  # no further move: velocity decays to zero
        human = next(a for a in snap.agents if a.id == 100)
        assert human.velocity == Vec2(0, 0)

    def test_out_of_region_human_ignored_by_terms(self):
        engine = make_engine(robots=[Vec2(7.5, 7.5)])
        engine.apply_command(SetMode(ModeId.COHESION))
        engine.apply_command(AddHuman(100, Vec2(16, 7.5)))  # in band, out of region
        for _ in range(10):
            snap = engine.step()
        # cohesion sees only the robot itself: no movement at all
        assert snap.robots[0].position == Vec2(7.5, 7.5)
        assert snap.lights[0] is LightColor.LIGHT_BLUE


class TestGesturePipelineIntegration:
    def setup_engine(self, robots=None):
        engine = make_engine(
            robots=robots or [Vec2(4, 4), Vec2(11, 11)],
            mode_table=stationary_table(),
        )
        engine.apply_command(AddHuman(100, Vec2(7, 7)))
        engine.step()
        return engine

    def test_debounced_onset_then_response(self):
        engine = self.setup_engine()
        engine.apply_command(SetGesture(100, Gesture.LEFT_HAND_UP))
        snaps = [engine.step() for _ in range(3)]
        assert snaps[0].gesture_onsets == ()
        assert snaps[1].gesture_onsets == ()
        # gesture held from tick 2: confirmed on tick 4 (3rd consecutive)
        assert snaps[2].gesture_onsets == ((100, Gesture.LEFT_HAND_UP),)
        kinds = {r.kind for r in snaps[2].responses}
        assert kinds == {ResponseKind.GRIPPER_OPEN_CLOSE}
        assert snaps[2].lights[0] is LightColor.DARK_BLUE

    def test_spin_and_denial_by_distance(self):
        engine = self.setup_engine(robots=[Vec2(4, 4), Vec2(5, 4), Vec2(11, 11)])
        engine.apply_command(SetGesture(100, Gesture.RIGHT_HAND_UP))
        for _ in range(4):
            snap = engine.step()
        by_robot = {r.robot_id: r.kind for r in snap.responses}
        assert by_robot[0] is ResponseKind.PULSE_GREEN  # robot 1 is 1 m away
        assert by_robot[1] is ResponseKind.PULSE_GREEN
        assert by_robot[2] is ResponseKind.SPIN_IN_PLACE

    def test_spin_suppresses_base_and_rotates(self):
        engine = make_engine(robots=[Vec2(4, 4), Vec2(11, 11)])
        engine.apply_command(SetMode(ModeId.COHESION))
        engine.apply_command(AddHuman(100, Vec2(7, 7)))
        engine.step()
        engine.apply_command(SetGesture(100, Gesture.RIGHT_HAND_UP))
        for _ in range(3):
            snap = engine.step()
        assert {r.kind for r in snap.responses} == {ResponseKind.SPIN_IN_PLACE}
        pos_at_spin_start = {a.id: a.position for a in snap.robots}
        heading_start = {a.id: a.heading for a in snap.robots}
        for _ in range(10):
            snap = engine.step()
        for a in snap.robots:
            assert a.position == pos_at_spin_start[a.id]
            assert a.heading != heading_start[a.id]

    def test_response_not_interrupted_by_new_gesture(self):
        engine = self.setup_engine()
        engine.apply_command(SetGesture(100, Gesture.HANDS_TOGETHER))
        for _ in range(4):
            engine.step()
        engine.apply_command(SetGesture(100, None))
        engine.step()
        engine.apply_command(SetGesture(100, Gesture.HANDS_TOGETHER))
        snap = None
        for _ in range(4):
            snap = engine.step()
        # second onset arrives while gaze still runs: the running response
        # continues (one response per robot, elapsed unbroken)
        gaze = [r for r in snap.responses if r.kind is ResponseKind.GAZE_UP]
        assert len(gaze) == 2
        assert all(r.elapsed_s > 0.25 for r in gaze)

    def test_lights_yellow_with_human(self):
        engine = self.setup_engine()
        snap = engine.step()
        assert all(c is LightColor.YELLOW for c in snap.lights.values())

    def test_gaze_targets_gesturing_human(self):
        engine = self.setup_engine()
        engine.apply_command(AddHuman(50, Vec2(3, 3)))
        engine.apply_command(SetGesture(100, Gesture.HANDS_TOGETHER))
        snap = None
        for _ in range(4):
            snap = engine.step()
        assert all(g.human_id == 100 for g in snap.gaze)

    def test_gesture_outside_region_ignored(self):
        engine = self.setup_engine()
        engine.apply_command(MoveHuman(100, Vec2(16, 7)))
        engine.apply_command(SetGesture(100, Gesture.LEFT_HAND_UP))
        for _ in range(6):
            snap = engine.step()
        assert snap.responses == ()
        assert snap.gesture_onsets == ()


class TestFuzz:
    def test_containment_and_speed_cap_random_configs(self):
        """Adversarial gains and random commands never break the two hard
        invariants."""
        rng = random.Random(12345)
        total_ticks = 0
        while total_ticks < 10_000:
            width = rng.uniform(4, 30)
            length = rng.uniform(4, 30)
            x0, y0 = rng.uniform(-20, 20), rng.uniform(-20, 20)
            boundary = BoundaryRegion(x0, x0 + width, y0, y0 + length)
            table = {
                m: WeightMode(*[rng.uniform(0, 8) for _ in range(7)]) for m in ModeId
            }
            v_max = rng.uniform(0.3, 3.0)
            config = EngineConfig(
                boundary=boundary, v_max=v_max, mode_table=table, seed=rng.getrandbits(32)
            )
            n_robots = rng.randint(1, 10)
            robots = [
                Vec2(
                    rng.uniform(boundary.x_min, boundary.x_max),
                    rng.uniform(boundary.y_min, boundary.y_max),
                )
                for _ in range(n_robots)
            ]
            engine = Engine(config, robots)
            prev = {a.id: a.position for a in engine.latest_snapshot.robots}
            cap = v_max * config.dt + 1e-9
            for _ in range(100):
                if rng.random() < 0.1:
                    engine.apply_command(SetMode(rng.choice(list(ModeId))))
                if rng.random() < 0.05:
                    hid = rng.randint(100, 104)
                    engine.apply_command(
                        AddHuman(
                            hid,
                            Vec2(
                                rng.uniform(boundary.x_min - 4, boundary.x_max + 4),
                                rng.uniform(boundary.y_min - 4, boundary.y_max + 4),
                            ),
                        )
                    )
                snap = engine.step()
                total_ticks += 1
                for a in snap.robots:
                    assert boundary.x_min < a.position.x < boundary.x_max
                    assert boundary.y_min < a.position.y < boundary.y_max
                    assert a.position.distance_to(prev[a.id]) <= cap
                    prev[a.id] = a.position


class TestThroughput:
    def test_step_speed_10_agents(self):
        import time

        engine = make_engine(robots=[Vec2(2 + i, 2 + i * 0.5) for i in range(7)])
        for hid in (100, 101, 102):
            engine.apply_command(AddHuman(hid, Vec2(5 + hid % 7, 8)))
        engine.apply_command(SetMode(ModeId.DEFAULT))
        for _ in range(50):  # warmup
            engine.step()
        n = 2000
        start = time.perf_counter()
        for _ in range(n):
            engine.step()
        mean_ms = (time.perf_counter() - start) / n * 1000
        assert mean_ms < 2.5, f"mean step cost {mean_ms:.3f} ms"
