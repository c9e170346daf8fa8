"""
Learning-status estimation and dynamic pseudo-label thresholds.

Class-level confidence P_c is the mean max-probability over the unlabeled
instances whose argmax is c. It is mapped through a monotone function and
clamped into [1 - tau, tau] to give one threshold per class.
"""
import enum
from dataclasses import dataclass

import numpy as np

from apps.common.errors import InvalidArgumentError, check_condition, check_in_range
from apps.common.errors.constants import ERROR_LENGTH_MISMATCH, ERROR_OUT_OF_RANGE

from .constants import EXPONENTIAL_MAPPING_SHARPNESS


class MappingKind(str, enum.Enum):
    CONCAVE = "concave"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"exp": cls.EXPONENTIAL}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError as err:
            choices = ", ".join(kind.value for kind in cls)
            raise InvalidArgumentError(
                ERROR_OUT_OF_RANGE, f"mapping={value!r}; expected one of {choices}"
            ) from err


@dataclass
class ClassConfidenceStats:
    """Per-class accumulators: sum of max-probabilities and instance count."""
    sum_conf: np.ndarray
    count: np.ndarray

    @classmethod
    def fresh(cls, num_classes):
        return cls(
            sum_conf=np.zeros(num_classes, dtype=np.float64),
            count=np.zeros(num_classes, dtype=np.int64),
        )

    @property
    def num_classes(self):
        return self.sum_conf.shape[0]

    def copy(self):
        return ClassConfidenceStats(self.sum_conf.copy(), self.count.copy())

    def merge(self, other):
        """Sum of two partial accumulators over disjoint shards."""
        check_condition(
            other.num_classes == self.num_classes, ERROR_LENGTH_MISMATCH,
            "cannot merge stats with different class counts",
        )
        return ClassConfidenceStats(self.sum_conf + other.sum_conf, self.count + other.count)

    def as_dict(self):
        return {"sum_conf": self.sum_conf.tolist(), "count": self.count.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(
            sum_conf=np.asarray(data["sum_conf"], dtype=np.float64),
            count=np.asarray(data["count"], dtype=np.int64),
        )


@dataclass(frozen=True)
class ClassConfidence:
    """P_c per class; NaN marks a class nothing was assigned to."""
    values: np.ndarray

    @property
    def observed(self):
        return ~np.isnan(self.values)

    def as_list(self):
        return [None if np.isnan(v) else float(v) for v in self.values]


@dataclass(frozen=True)
class PseudoLabelMask:
    keep: np.ndarray
    labels: np.ndarray
    confidence: np.ndarray

    @property
    def used_count(self):
        return int(self.keep.sum())

    def kept_per_class(self, num_classes):
        return np.bincount(self.labels[self.keep], minlength=num_classes)


def _as_prob_rows(probs):
    return np.atleast_2d(np.asarray(probs, dtype=np.float64))


def assign_class(probs):
    """Argmax class; ties go to the lowest index. Accepts one vector or a batch."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim == 1:
        return int(np.argmax(probs))
    return np.argmax(probs, axis=1)


def update_stats(stats, batch):
    """
    Accumulate max-probabilities of a batch of predictions into their argmax class.

    Returns a new ClassConfidenceStats; the input is not modified. Accumulation
    is sequential so update(update(s, A), B) equals update(s, A ++ B) exactly.
    """
    result = stats.copy()
    probs = _as_prob_rows(batch)
    if probs.size == 0:
        return result
    check_condition(
        probs.shape[1] == stats.num_classes, ERROR_LENGTH_MISMATCH,
        f"predictions have {probs.shape[1]} classes, stats track {stats.num_classes}",
    )
    classes = assign_class(probs)
    np.add.at(result.count, classes, 1)
    np.add.at(result.sum_conf, classes, probs.max(axis=1))
    return result


def class_confidence(stats):
    values = np.full(stats.num_classes, np.nan)
    observed = stats.count > 0
    values[observed] = stats.sum_conf[observed] / stats.count[observed]
    return ClassConfidence(values=values)


def _check_unit_interval(x):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidArgumentError(ERROR_OUT_OF_RANGE, f"learning status {x!r} outside [0, 1]")
    return arr


def map_learning_status(x, kind):
    """Map learning status in [0, 1] to [0, 1]; scalar in, scalar out."""
    kind = MappingKind.parse(kind)
    arr = _check_unit_interval(x)
    if kind is MappingKind.CONCAVE:
        mapped = arr / (2.0 - arr)
    elif kind is MappingKind.LINEAR:
        mapped = arr.copy()
    else:
        mapped = np.exp(-EXPONENTIAL_MAPPING_SHARPNESS * (1.0 - arr) ** 2)
    if mapped.ndim == 0:
        return float(mapped)
    return mapped


def check_tau(tau):
    return check_in_range(tau, 0.5, 1.0, "tau", low_inclusive=False, high_inclusive=False)


def fixed_thresholds(num_classes, tau):
    """Constant threshold vector: FixMatch/PL behavior and the cold start."""
    check_tau(tau)
    return np.full(num_classes, float(tau))


def dynamic_threshold(conf, tau, kind):
    """
    Per-class threshold clamp(M(P_c), 1 - tau, tau).

    Classes without observations get tau.
    """
    check_tau(tau)
    thresholds = np.full(conf.values.shape[0], float(tau))
    observed = conf.observed
    if np.any(observed):
        mapped = map_learning_status(conf.values[observed], kind)
        thresholds[observed] = np.clip(mapped, 1.0 - tau, tau)
    return thresholds


def pseudo_label_mask(weak_probs, thresholds):
    """Keep instance i iff max(p_i) >= threshold of its argmax class (inclusive)."""
    probs = _as_prob_rows(weak_probs)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if probs.size == 0:
        empty = np.zeros(0)
        return PseudoLabelMask(empty.astype(bool), empty.astype(np.int64), empty)
    check_condition(
        probs.shape[1] == thresholds.shape[0], ERROR_LENGTH_MISMATCH,
        f"{thresholds.shape[0]} thresholds for {probs.shape[1]} classes",
    )
    labels = assign_class(probs)
    confidence = probs.max(axis=1)
    keep = confidence >= thresholds[labels]
    return PseudoLabelMask(keep=keep, labels=labels, confidence=confidence)


def confidence_balance(conf):
    """Mean and population std of P_c over observed classes (None when none observed)."""
    observed = conf.values[conf.observed]
    if observed.size == 0:
        return None, None
    return float(observed.mean()), float(observed.std())
