"""flocksim: a deterministic multi-robot flocking simulator with
gesture-responsive behaviors, choreographer-selectable weight modes, and a
learned mode selector trained from choreographer sessions."""

from .agents import AgentKind, AgentState, BoundaryRegion
from .classifier import Model, TrainConfig, TrainingExample, load_model, predict_mode, save_model, train
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
)
from .engine import Engine, EngineConfig, FlockSnapshot
from .features import FeatureVector, best_fit_cubic, build_feature_vector, measure_of_spread, regional_density
from .geometry import Vec2
from .gestures import Gesture, HumanKeypoints, classify_gesture
from .modes import ModeId, WeightMode, default_mode_table
from .replay import ReplayDivergenceError, replay_log, verify_log
from .responses import GazeTarget, LightColor, ResponseAction, ResponseKind
from .runner import RunResult, run_scenario
from .scenario import Scenario, ScenarioError, load_scenario
from .sessionlog import SessionLog, export_training_data, gesture_histogram, mode_histogram, read_log

__version__ = "0.1.0"

__all__ = [
    "Ack",
    "AddHuman",
    "AgentKind",
    "AgentState",
    "BoundaryRegion",
    "Command",
    "Condition",
    "ConditionKind",
    "Engine",
    "EngineConfig",
    "FeatureVector",
    "FlockSnapshot",
    "GazeTarget",
    "Gesture",
    "HumanKeypoints",
    "LightColor",
    "Model",
    "ModeId",
    "MoveHuman",
    "Pause",
    "RemoveHuman",
    "ReplayDivergenceError",
    "ResponseAction",
    "ResponseKind",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "SessionLog",
    "SetCondition",
    "SetGesture",
    "SetMode",
    "Start",
    "TrainConfig",
    "TrainingExample",
    "Vec2",
    "WeightMode",
    "best_fit_cubic",
    "build_feature_vector",
    "classify_gesture",
    "default_mode_table",
    "export_training_data",
    "gesture_histogram",
    "load_model",
    "load_scenario",
    "measure_of_spread",
    "mode_histogram",
    "predict_mode",
    "read_log",
    "regional_density",
    "replay_log",
    "run_scenario",
    "save_model",
    "train",
    "verify_log",
]
