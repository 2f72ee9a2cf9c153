import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flocksim.geometry import Vec2
from flocksim.gestures import (
    Gesture,
    GestureDebouncer,
    HumanKeypoints,
    classify_gesture,
    keypoints_for_pose,
)
from flocksim.responses import (
    ARM_TRAJECTORY_DURATIONS_S,
    ArmState,
    GazeTarget,
    LightColor,
    ResponseAction,
    ResponseKind,
    ResponseStatus,
    arm_service_tick,
    begin_response,
    head_targets,
    light_color,
    tick_response,
)
from flocksim.rng import SplitMix64

DT = 0.05


def kp(human_id=1, **kwargs):
    return HumanKeypoints(human_id=human_id, position=Vec2(0, 0), **kwargs)


class TestClassifyGesture:
    def test_hands_together_above_shoulders(self):
        k = kp(
            left_wrist=(0, 0, 1.6),
            right_wrist=(0, 0, 1.6),
            left_shoulder=(-0.2, 0, 1.4),
            right_shoulder=(0.2, 0, 1.4),
        )
        assert classify_gesture(k) is Gesture.HANDS_TOGETHER

    def test_right_hand_up_partial_detection(self):
        k = kp(right_wrist=(0.1, 0, 1.8), right_shoulder=(0.2, 0, 1.4))
        assert classify_gesture(k) is Gesture.RIGHT_HAND_UP

    def test_left_hand_up(self):
        k = kp(
            left_wrist=(-0.1, 0, 1.8),
            left_shoulder=(-0.2, 0, 1.4),
            right_shoulder=(0.2, 0, 1.4),
        )
        assert classify_gesture(k) is Gesture.LEFT_HAND_UP

    def test_no_wrists(self):
        assert classify_gesture(kp(left_shoulder=(-0.2, 0, 1.4))) is None

    def test_both_hands_up_apart_prefers_right(self):
        k = kp(
            left_wrist=(-0.25, 0, 1.8),
            right_wrist=(0.25, 0, 1.8),
            left_shoulder=(-0.2, 0, 1.4),
            right_shoulder=(0.2, 0, 1.4),
        )
        assert classify_gesture(k) is Gesture.RIGHT_HAND_UP

    def test_wrist_without_any_shoulder(self):
        assert classify_gesture(kp(right_wrist=(0, 0, 1.8))) is None

    def test_hands_down_nothing(self):
        k = kp(
            left_wrist=(-0.25, 0, 1.0),
            right_wrist=(0.25, 0, 1.0),
            left_shoulder=(-0.2, 0, 1.4),
            right_shoulder=(0.2, 0, 1.4),
        )
        assert classify_gesture(k) is None

    def test_shoulder_reference_is_max(self):
        # wrist above the lower shoulder only: not a hand-up
        k = kp(right_wrist=(0.1, 0, 1.5), left_shoulder=(-0.2, 0, 1.6), right_shoulder=(0.2, 0, 1.3))
        assert classify_gesture(k) is None

    def test_implausible_shoulders_rejected(self):
        with pytest.raises(ValueError, match="shoulder span"):
            kp(left_shoulder=(-1.0, 0, 1.4), right_shoulder=(1.0, 0, 1.4))

    def test_non_finite_keypoint_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            kp(left_wrist=(0.0, math.nan, 1.0))

    @given(
        st.tuples(*[st.floats(-1, 1) for _ in range(3)]),
        st.tuples(*[st.floats(-1, 1) for _ in range(3)]),
    )
    def test_joined_hands_always_preempt(self, lw, rw):
        base = dict(left_shoulder=(-0.2, 0.0, 1.4), right_shoulder=(0.2, 0.0, 1.4))
        d = math.dist(lw, rw)
        result = classify_gesture(kp(left_wrist=lw, right_wrist=rw, **base))
        if d < 0.08:
            assert result is Gesture.HANDS_TOGETHER
        else:
            assert result is not Gesture.HANDS_TOGETHER

    def test_synthesized_poses_classify_to_their_gesture(self):
        for g in (None, *Gesture):
            pose = keypoints_for_pose(5, Vec2(3, 4), g)
            assert classify_gesture(pose) is g


class TestDebounce:
    def test_three_ticks_to_confirm(self):
        d = GestureDebouncer()
        assert d.update(Gesture.RIGHT_HAND_UP) == (None, False)
        assert d.update(Gesture.RIGHT_HAND_UP) == (None, False)
        assert d.update(Gesture.RIGHT_HAND_UP) == (Gesture.RIGHT_HAND_UP, True)
        # holding: confirmed stays, no new onset
        assert d.update(Gesture.RIGHT_HAND_UP) == (Gesture.RIGHT_HAND_UP, False)

    def test_release_resets(self):
        d = GestureDebouncer()
        for _ in range(3):
            d.update(Gesture.LEFT_HAND_UP)
        assert d.update(None) == (None, False)
        assert d.update(Gesture.LEFT_HAND_UP) == (None, False)

    def test_switch_restarts_count(self):
        d = GestureDebouncer()
        d.update(Gesture.LEFT_HAND_UP)
        d.update(Gesture.LEFT_HAND_UP)
        assert d.update(Gesture.RIGHT_HAND_UP) == (None, False)
        d.update(Gesture.RIGHT_HAND_UP)
        assert d.update(Gesture.RIGHT_HAND_UP) == (Gesture.RIGHT_HAND_UP, True)


class TestResponses:
    def test_mapping(self):
        positions = {0: Vec2(0, 0), 1: Vec2(5, 5)}
        assert begin_response(0, Gesture.HANDS_TOGETHER, positions).kind is ResponseKind.GAZE_UP
        assert (
            begin_response(0, Gesture.LEFT_HAND_UP, positions).kind
            is ResponseKind.GRIPPER_OPEN_CLOSE
        )
        assert (
            begin_response(0, Gesture.RIGHT_HAND_UP, positions).kind
            is ResponseKind.SPIN_IN_PLACE
        )

    def test_spin_denied_when_crowded(self):
        positions = {0: Vec2(0, 0), 1: Vec2(1.0, 0)}
        action = begin_response(0, Gesture.RIGHT_HAND_UP, positions)
        assert action.kind is ResponseKind.PULSE_GREEN
        assert action.light_color is LightColor.GREEN

    def test_colors(self):
        assert ResponseAction(0, ResponseKind.GAZE_UP).light_color is LightColor.ORANGE
        assert ResponseAction(0, ResponseKind.SPIN_IN_PLACE).light_color is LightColor.GREEN
        assert (
            ResponseAction(0, ResponseKind.GRIPPER_OPEN_CLOSE).light_color
            is LightColor.DARK_BLUE
        )

    def test_completion_boundary(self):
        action = ResponseAction(0, ResponseKind.GRIPPER_OPEN_CLOSE, elapsed_s=1.95)
        assert tick_response(action, DT) is ResponseStatus.COMPLETED

    def test_gaze_still_running(self):
        action = ResponseAction(0, ResponseKind.GAZE_UP, elapsed_s=1.0)
        assert tick_response(action, DT) is ResponseStatus.RUNNING

    def test_exact_tick_counts(self):
        for kind, expected in [
            (ResponseKind.GRIPPER_OPEN_CLOSE, 40),
            (ResponseKind.GAZE_UP, 80),
            (ResponseKind.SPIN_IN_PLACE, 240),
            (ResponseKind.PULSE_GREEN, 40),
        ]:
            action = ResponseAction(0, kind)
            ticks = 0
            while True:
                ticks += 1
                if tick_response(action, DT) is ResponseStatus.COMPLETED:
                    break
            assert ticks == expected == math.ceil(action.duration_s / DT)

    def test_spin_rotation_totals_full_turn(self):
        action = ResponseAction(0, ResponseKind.SPIN_IN_PLACE)
        total = 0.0
        while tick_response(action, DT) is ResponseStatus.RUNNING:
            total += 2 * math.pi / 12 * DT
        total += 2 * math.pi / 12 * DT
        assert total == pytest.approx(2 * math.pi)


class TestHeadTargets:
    ROBOTS = {0: Vec2(1, 1), 1: Vec2(9, 9)}

    def test_gesturing_human_wins_for_all(self):
        humans = [(7, Vec2(0, 0), True), (3, Vec2(10, 10), False)]
        targets = head_targets(self.ROBOTS, humans)
        assert targets == [GazeTarget(0, 7), GazeTarget(1, 7)]

    def test_lowest_gesturing_id_when_many(self):
        humans = [(7, Vec2(0, 0), True), (3, Vec2(10, 10), True)]
        assert all(t.human_id == 3 for t in head_targets(self.ROBOTS, humans))

    def test_nearest_human_otherwise(self):
        humans = [(5, Vec2(0, 0), False), (6, Vec2(10, 10), False)]
        targets = head_targets(self.ROBOTS, humans)
        assert targets == [GazeTarget(0, 5), GazeTarget(1, 6)]

    def test_no_humans_region_center(self):
        targets = head_targets(self.ROBOTS, [])
        assert targets == [GazeTarget(0, None), GazeTarget(1, None)]

    def test_one_target_per_robot(self):
        humans = [(5, Vec2(2, 2), False)]
        assert len(head_targets(self.ROBOTS, humans)) == len(self.ROBOTS)


class TestLights:
    def test_idle(self):
        assert light_color([], humans_in_region=False) is LightColor.LIGHT_BLUE

    def test_human_present(self):
        assert light_color([], humans_in_region=True) is LightColor.YELLOW

    def test_response_wins(self):
        gaze = ResponseAction(0, ResponseKind.GAZE_UP, begun_tick=5)
        assert light_color([gaze], humans_in_region=True) is LightColor.ORANGE

    def test_newest_response_wins(self):
        older = ResponseAction(0, ResponseKind.GAZE_UP, begun_tick=5)
        newer = ResponseAction(0, ResponseKind.GRIPPER_OPEN_CLOSE, begun_tick=9)
        assert light_color([older, newer], True) is LightColor.DARK_BLUE


class TestArmService:
    def test_running_trajectory_unchanged(self):
        arm = ArmState(trajectory_id=2, elapsed_s=0.0)
        rng = SplitMix64(1)
        assert arm_service_tick(arm, DT, rng) is False
        assert arm.trajectory_id == 2

    def test_completion_picks_valid_id(self):
        rng = SplitMix64(1)
        arm = ArmState(trajectory_id=0, elapsed_s=ARM_TRAJECTORY_DURATIONS_S[0] - DT)
        assert arm_service_tick(arm, DT, rng) is True
        assert arm.trajectory_id in (0, 1, 2, 3)
        assert arm.elapsed_s == 0.0

    def test_uniform_selection(self):
        rng = SplitMix64(2026)
        counts = [0, 0, 0, 0]
        for _ in range(10_000):
            arm = ArmState(trajectory_id=0, elapsed_s=ARM_TRAJECTORY_DURATIONS_S[0])
            arm_service_tick(arm, DT, rng)
            counts[arm.trajectory_id] += 1
        for c in counts:
            assert abs(c / 10_000 - 0.25) < 0.02
