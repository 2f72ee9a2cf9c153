"""Weight-mode selection learned from choreographer sessions.

A multinomial logistic regression over the 8 geometric features: small
enough to train from hours of 20 Hz labels in seconds, deterministic given
a seed, and portable as a plain JSON weight matrix. Training uses numpy;
prediction is plain Python so live engines don't depend on the host BLAS.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FeatureVector
from .modes import MODE_ORDER, ModeId

MODEL_FORMAT_VERSION = 1

N_FEATURES = 8
N_CLASSES = len(MODE_ORDER)

# Features with training-set std below this are flagged constant and zeroed.
_CONSTANT_STD_EPS = 1e-12


class ModelFormatError(ValueError):
    """Raised when a model file is corrupt or from another format version."""


@dataclass(frozen=True)
class TrainingExample:
    features: FeatureVector
    label: ModeId
    tick: int = 0
    session_id: str = ""


@dataclass
class Model:
    """Trained classifier: weight rows per mode over (8 z-scored features
    + bias), with the normalization statistics baked in."""

    weights: list[list[float]]  # N_CLASSES x (N_FEATURES + 1)
    feature_mean: list[float]
    feature_std: list[float]
    constant_features: list[bool]
    version: int = MODEL_FORMAT_VERSION

    def normalize(self, values: tuple[float, ...]) -> list[float]:
        out = []
        for v, mu, sd, const in zip(values, self.feature_mean, self.feature_std, self.constant_features):
            out.append(0.0 if const else (v - mu) / sd)
        return out

    def scores(self, features: FeatureVector) -> list[float]:
        values = features.as_tuple()
        if not all(math.isfinite(v) for v in values):
            raise ValueError("features contain non-finite values")
        z = self.normalize(values) + [1.0]
        return [sum(w * x for w, x in zip(row, z)) for row in self.weights]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "classes": [m.value for m in MODE_ORDER],
            "weights": self.weights,
            "feature_mean": self.feature_mean,
            "feature_std": self.feature_std,
            "constant_features": self.constant_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Model":
        try:
            version = d["version"]
            if version != MODEL_FORMAT_VERSION:
                raise ModelFormatError(
                    f"model format version {version} unsupported (expected {MODEL_FORMAT_VERSION})"
                )
            if d["classes"] != [m.value for m in MODE_ORDER]:
                raise ModelFormatError("model class order does not match this build")
            weights = [[float(v) for v in row] for row in d["weights"]]
            if len(weights) != N_CLASSES or any(len(r) != N_FEATURES + 1 for r in weights):
                raise ModelFormatError("weight matrix has the wrong shape")
            model = cls(
                weights=weights,
                feature_mean=[float(v) for v in d["feature_mean"]],
                feature_std=[float(v) for v in d["feature_std"]],
                constant_features=[bool(v) for v in d["constant_features"]],
                version=version,
            )
        except ModelFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed model payload: {exc}") from exc
        if not all(math.isfinite(v) for row in model.weights for v in row):
            raise ModelFormatError("model weights contain non-finite values")
        return model


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 400
    learning_rate: float = 0.5
    seed: int = 0


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(
    weights: np.ndarray, x: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient for weights of shape
    (N_CLASSES, d), design matrix x of shape (m, d) with bias column, and
    integer labels. Exposed separately so the gradient can be checked
    against finite differences."""
    m = x.shape[0]
    probs = _softmax(x @ weights.T)
    loss = float(-np.log(probs[np.arange(m), labels] + 1e-300).mean())
    delta = probs
    delta[np.arange(m), labels] -= 1.0
    grad = delta.T @ x / m
    return loss, grad


def _design_matrix(dataset: list[TrainingExample]) -> tuple[np.ndarray, np.ndarray, list[float], list[float], list[bool]]:
    raw = np.array([ex.features.as_tuple() for ex in dataset], dtype=np.float64)
    labels = np.array([MODE_ORDER.index(ex.label) for ex in dataset], dtype=np.int64)
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    constant = std < _CONSTANT_STD_EPS
    safe_std = np.where(constant, 1.0, std)
    z = (raw - mean) / safe_std
    z[:, constant] = 0.0
    x = np.hstack([z, np.ones((raw.shape[0], 1))])
    return x, labels, mean.tolist(), safe_std.tolist(), constant.tolist()


def train(dataset: list[TrainingExample], config: TrainConfig = TrainConfig()) -> Model:
    """Fit the classifier by full-batch gradient descent.

    Deterministic for a given dataset order and seed. Emits a warning when
    some modes have no examples (the model can then never predict them).
    """
    if not dataset:
        raise ValueError("training requires at least one example")
    present = {ex.label for ex in dataset}
    missing = [m.value for m in MODE_ORDER if m not in present]
    if missing:
        warnings.warn(
            f"no training examples for modes: {', '.join(missing)}", stacklevel=2
        )
    x, labels, mean, std, constant = _design_matrix(dataset)
    rng = np.random.default_rng(config.seed)
    weights = rng.normal(0.0, 0.01, size=(N_CLASSES, N_FEATURES + 1))
    for _ in range(config.epochs):
        _, grad = loss_and_grad(weights, x, labels)
        weights -= config.learning_rate * grad
    return Model(
        weights=[[float(v) for v in row] for row in weights],
        feature_mean=mean,
        feature_std=std,
        constant_features=constant,
    )


def predict_mode(model: Model, features: FeatureVector) -> ModeId:
    """Argmax over the seven class scores; ties resolve to the earliest
    mode in the canonical order."""
    scores = model.scores(features)
    best = 0
    for idx in range(1, N_CLASSES):
        if scores[idx] > scores[best]:
            best = idx
    return MODE_ORDER[best]


def training_accuracy(model: Model, dataset: list[TrainingExample]) -> float:
    if not dataset:
        raise ValueError("empty dataset")
    hits = sum(1 for ex in dataset if predict_mode(model, ex.features) is ex.label)
    return hits / len(dataset)


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), sort_keys=True, indent=1) + "\n")


def load_model(path: str | Path) -> Model:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError(f"model file {path} is not a JSON object")
    return Model.from_dict(payload)
