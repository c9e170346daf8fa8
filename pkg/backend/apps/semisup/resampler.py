"""
Learning-status balanced re-sampling.

Instances of classes with low class-level confidence get larger sampling
weights; the warm factor ramps the penalty on well-learned classes in over
training. Raw weights are floored, normalised globally and sampled with
replacement.
"""
import math
from dataclasses import dataclass

import numpy as np

from apps.common.errors import InvalidArgumentError, InvariantViolation, check_condition, check_in_range
from apps.common.errors.constants import (
    ERROR_EMPTY_BATCH,
    ERROR_INVALID_DISTRIBUTION,
    ERROR_LENGTH_MISMATCH,
    ERROR_OUT_OF_RANGE,
)

from .constants import WARM_SHARPNESS, WEIGHT_FLOOR
from .core_model import forward
from .data_synth import weak_augment


@dataclass(frozen=True)
class SampleWeightTable:
    raw: np.ndarray
    dist: np.ndarray

    def __len__(self):
        return self.raw.shape[0]

    def as_dict(self):
        return {"raw": self.raw.tolist(), "dist": self.dist.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(raw=np.asarray(data["raw"], dtype=np.float64),
                   dist=np.asarray(data["dist"], dtype=np.float64))


def warm_factor(epoch, max_epochs):
    """exp(-5 (1 - e / E_max)^2), from e^-5 at the start to 1 at E_max."""
    check_condition(max_epochs >= 1, ERROR_OUT_OF_RANGE, f"E_max must be >= 1, got {max_epochs}")
    check_in_range(epoch, 0, max_epochs, "epoch")
    return math.exp(-WARM_SHARPNESS * (1.0 - epoch / max_epochs) ** 2)


def instance_weight(class_conf, confidence, warm, tau):
    """
    Raw weight of one instance (vectorised over numpy inputs).

    1 - W * P_c * p_i above tau, 2 - W * P_c * p_i at or below it, floored at 1e-3.
    """
    class_conf = np.asarray(class_conf, dtype=np.float64)
    confidence = np.asarray(confidence, dtype=np.float64)
    for name, value in (("P_c", class_conf), ("p_i", confidence)):
        if np.any(np.isnan(value)) or np.any(value < 0.0) or np.any(value > 1.0):
            raise InvalidArgumentError(ERROR_OUT_OF_RANGE, f"{name} outside [0, 1]")
    penalty = warm * class_conf * confidence
    raw = np.where(class_conf > tau, 1.0 - penalty, 2.0 - penalty)
    raw = np.maximum(raw, WEIGHT_FLOOR)
    if raw.ndim == 0:
        return float(raw)
    return raw


def build_distribution(weights):
    raw = np.asarray(weights, dtype=np.float64).ravel()
    check_condition(raw.size > 0, ERROR_EMPTY_BATCH, "no weights to normalise")
    check_condition(np.all(raw >= 0.0) and np.all(np.isfinite(raw)), ERROR_OUT_OF_RANGE,
                    "weights must be finite and non-negative")
    total = raw.sum()
    check_condition(total > 0.0, ERROR_OUT_OF_RANGE, "all weights are zero")
    dist = raw / total
    if not math.isclose(dist.sum(), 1.0, abs_tol=1e-9):
        raise InvariantViolation(ERROR_INVALID_DISTRIBUTION, f"distribution sums to {dist.sum()!r}")
    return SampleWeightTable(raw=raw, dist=dist)


def uniform_table(size):
    return build_distribution(np.ones(size))


def resample_indices(table, n, rng):
    """n independent draws with replacement from table.dist."""
    check_condition(n >= 1, ERROR_OUT_OF_RANGE, f"draw count must be >= 1, got {n}")
    return rng.choice(len(table), size=n, replace=True, p=table.dist)


def compute_weights(classes, confidences, conf, epoch, max_epochs, tau):
    """
    Sampling table for a dataset snapshot of (class c_i, confidence p_i) pairs.

    Classes without a class-level confidence count as lowest status (P_c = 0).
    """
    classes = np.asarray(classes, dtype=np.int64)
    confidences = np.asarray(confidences, dtype=np.float64)
    check_condition(classes.size > 0, ERROR_EMPTY_BATCH, "cannot weight an empty dataset")
    check_condition(classes.shape == confidences.shape, ERROR_LENGTH_MISMATCH,
                    "classes and confidences differ in length")
    class_values = np.nan_to_num(conf.values, nan=0.0)
    warm = warm_factor(epoch, max_epochs)
    return build_distribution(instance_weight(class_values[classes], confidences, warm, tau))


def snapshot_predictions(params, features, rng, augment_cfg):
    """(class, confidence) of every instance under one weak view of the current model."""
    probs = forward(params, weak_augment(np.atleast_2d(features), augment_cfg, rng))
    return np.argmax(probs, axis=1), probs.max(axis=1)
