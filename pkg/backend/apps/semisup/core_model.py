"""
One-hidden-layer softmax classifier written directly in numpy.

Covers the forward pass, the supervised and thresholded pseudo-label
cross-entropies, their analytic gradient and a cosine-annealed SGD step.
Cross-entropies are computed from logits with a max-shifted log-sum-exp.
"""
import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from apps.common.errors import (
    ConfigurationError,
    InvalidArgumentError,
    InvariantViolation,
    check_condition,
    check_in_range,
)
from apps.common.errors.constants import (
    ERROR_DIMENSION_MISMATCH,
    ERROR_EMPTY_BATCH,
    ERROR_LENGTH_MISMATCH,
    ERROR_NON_FINITE,
    ERROR_OUT_OF_RANGE,
)

from .pseudo_label import pseudo_label_mask


@dataclass
class ModelParams:
    """Weights and biases; also used as the gradient container."""
    W1: np.ndarray  # [hidden, d_in]
    b1: np.ndarray  # [hidden]
    W2: np.ndarray  # [C, hidden]
    b2: np.ndarray  # [C]

    FIELDS: ClassVar[tuple] = ("W1", "b1", "W2", "b2")

    @property
    def d_in(self):
        return self.W1.shape[1]

    @property
    def hidden(self):
        return self.W1.shape[0]

    @property
    def num_classes(self):
        return self.W2.shape[0]

    def arrays(self):
        return tuple(getattr(self, name) for name in self.FIELDS)

    @classmethod
    def zeros(cls, d_in, hidden, num_classes):
        return cls(
            W1=np.zeros((hidden, d_in)),
            b1=np.zeros(hidden),
            W2=np.zeros((num_classes, hidden)),
            b2=np.zeros(num_classes),
        )

    def zeros_like(self):
        return ModelParams.zeros(self.d_in, self.hidden, self.num_classes)

    def copy(self):
        return ModelParams(*(array.copy() for array in self.arrays()))

    def validate(self):
        hidden, d_in = self.W1.shape
        num_classes = self.W2.shape[0]
        check_condition(
            self.b1.shape == (hidden,) and self.W2.shape == (num_classes, hidden)
            and self.b2.shape == (num_classes,),
            ERROR_DIMENSION_MISMATCH,
            f"inconsistent shapes W1{self.W1.shape} b1{self.b1.shape} "
            f"W2{self.W2.shape} b2{self.b2.shape}",
            ConfigurationError,
        )
        check_condition(
            all(np.all(np.isfinite(array)) for array in self.arrays()),
            ERROR_NON_FINITE, "model parameters contain non-finite entries", InvariantViolation,
        )
        return self

    def flatten(self):
        return np.concatenate([array.ravel() for array in self.arrays()])

    def unflatten(self, flat):
        """Parameters with this object's shapes filled from a flat vector."""
        flat = np.asarray(flat, dtype=np.float64)
        arrays, offset = [], 0
        for array in self.arrays():
            arrays.append(flat[offset:offset + array.size].reshape(array.shape).copy())
            offset += array.size
        check_condition(offset == flat.size, ERROR_LENGTH_MISMATCH, "flat vector has wrong length")
        return ModelParams(*arrays)

    def scaled_add(self, other, alpha):
        """self + alpha * other, element-wise per array."""
        return ModelParams(*(mine + alpha * theirs
                             for mine, theirs in zip(self.arrays(), other.arrays(), strict=True)))

    def as_dict(self):
        return {name: getattr(self, name).tolist() for name in self.FIELDS}

    @classmethod
    def from_dict(cls, data):
        return cls(**{name: np.asarray(data[name], dtype=np.float64) for name in cls.FIELDS})


@dataclass(frozen=True)
class LrSchedule:
    lr_max: float
    lr_min: float
    total_epochs: int

    def __post_init__(self):
        check_condition(
            0.0 < self.lr_min <= self.lr_max, ERROR_OUT_OF_RANGE,
            f"need 0 < lr_min <= lr_max, got lr_min={self.lr_min}, lr_max={self.lr_max}",
            ConfigurationError,
        )
        check_condition(
            self.total_epochs >= 1, ERROR_OUT_OF_RANGE,
            f"total_epochs must be >= 1, got {self.total_epochs}", ConfigurationError,
        )

    def learning_rate(self, epoch):
        """Cosine annealing from lr_max at epoch 0 to lr_min at total_epochs."""
        check_in_range(epoch, 0, self.total_epochs, "epoch")
        cosine = math.cos(math.pi * epoch / self.total_epochs)
        return self.lr_min + 0.5 * (self.lr_max - self.lr_min) * (1.0 + cosine)


def init_params(d_in, hidden, num_classes, rng):
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    bound1 = 1.0 / math.sqrt(d_in)
    bound2 = 1.0 / math.sqrt(hidden)
    return ModelParams(
        W1=rng.uniform(-bound1, bound1, size=(hidden, d_in)),
        b1=np.zeros(hidden),
        W2=rng.uniform(-bound2, bound2, size=(num_classes, hidden)),
        b2=np.zeros(num_classes),
    )


def _as_rows(params, features):
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if X.size and X.shape[1] != params.d_in:
        raise ConfigurationError(
            ERROR_DIMENSION_MISMATCH, f"features have {X.shape[1]} dims, model expects {params.d_in}"
        )
    return X


def _hidden_layer(params, X):
    pre_activation = X @ params.W1.T + params.b1
    return pre_activation, np.maximum(pre_activation, 0.0)


def logits(params, features):
    X = _as_rows(params, features)
    _, hidden = _hidden_layer(params, X)
    return hidden @ params.W2.T + params.b2


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def log_softmax(z):
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def forward(params, x):
    """Predictive distribution for one feature vector ([C]) or a batch ([n, C])."""
    single = np.asarray(x).ndim == 1
    probs = softmax(logits(params, x))
    return probs[0] if single else probs


def predict(params, features):
    return np.argmax(logits(params, features), axis=1)


def cross_entropy(z, labels):
    """Per-row cross-entropy of integer labels against logits."""
    return -log_softmax(z)[np.arange(z.shape[0]), labels]


def _check_labels(labels, num_classes):
    labels = np.asarray(labels, dtype=np.int64)
    if np.any(labels < 0) or np.any(labels >= num_classes):
        raise InvalidArgumentError(ERROR_OUT_OF_RANGE, f"labels must lie in [0, {num_classes})")
    return labels


def supervised_loss(params, features, labels):
    """Mean cross-entropy over a labeled batch (augmentation is the caller's job)."""
    X = _as_rows(params, features)
    check_condition(X.size > 0 and len(labels) > 0, ERROR_EMPTY_BATCH, "labeled batch is empty")
    check_condition(X.shape[0] == len(labels), ERROR_LENGTH_MISMATCH, "features and labels differ in length")
    labels = _check_labels(labels, params.num_classes)
    return float(cross_entropy(logits(params, X), labels).mean())


def _check_unlabeled(params, weak_probs, strong_features):
    weak_probs = np.atleast_2d(np.asarray(weak_probs, dtype=np.float64))
    strong = np.atleast_2d(np.asarray(strong_features, dtype=np.float64))
    n_weak = weak_probs.shape[0] if weak_probs.size else 0
    n_strong = strong.shape[0] if strong.size else 0
    check_condition(
        n_weak == n_strong, ERROR_LENGTH_MISMATCH,
        f"{n_weak} weak predictions for {n_strong} strong views",
    )
    return weak_probs, _as_rows(params, strong) if n_strong else strong


def unsupervised_loss(params, weak_probs, strong_features, thresholds):
    """
    Thresholded pseudo-label cross-entropy.

    Returns (loss, used_count). The loss sums over kept instances and divides
    by the full batch size; weak_probs are treated as constants.
    """
    weak_probs, strong = _check_unlabeled(params, weak_probs, strong_features)
    batch_size = strong.shape[0] if strong.size else 0
    if batch_size == 0:
        return 0.0, 0
    mask = pseudo_label_mask(weak_probs, thresholds)
    if mask.used_count == 0:
        return 0.0, 0
    per_instance = cross_entropy(logits(params, strong[mask.keep]), mask.labels[mask.keep])
    return float(per_instance.sum() / batch_size), mask.used_count


def total_loss(loss_s, loss_u, lambda_s, lambda_u):
    check_condition(lambda_s >= 0 and lambda_u >= 0, ERROR_OUT_OF_RANGE, "loss weights must be >= 0")
    return lambda_s * loss_s + lambda_u * loss_u


def _backprop(params, X, d_logits, pre_activation, hidden, grad):
    grad.W2 += d_logits.T @ hidden
    grad.b2 += d_logits.sum(axis=0)
    d_pre = (d_logits @ params.W2) * (pre_activation > 0.0)
    grad.W1 += d_pre.T @ X
    grad.b1 += d_pre.sum(axis=0)


@dataclass(frozen=True)
class ObjectiveResult:
    loss_s: float
    loss_u: float
    total: float
    used_count: int
    grad: ModelParams


def objective_and_gradient(params, features, labels, weak_probs=None, strong_features=None,
                           thresholds=None, lambda_s=1.0, lambda_u=1.0):
    """
    Joint objective lambda_s * l_s + lambda_u * l_u and its exact gradient.

    The unlabeled branch is skipped entirely when lambda_u is 0 or no
    unlabeled batch is given, so masked-out or disabled instances contribute
    exactly zero.
    """
    check_condition(lambda_s >= 0 and lambda_u >= 0, ERROR_OUT_OF_RANGE, "loss weights must be >= 0")
    X = _as_rows(params, features)
    check_condition(X.size > 0 and len(labels) > 0, ERROR_EMPTY_BATCH, "labeled batch is empty")
    check_condition(X.shape[0] == len(labels), ERROR_LENGTH_MISMATCH, "features and labels differ in length")
    labels = _check_labels(labels, params.num_classes)
    grad = params.zeros_like()

    pre_activation, hidden = _hidden_layer(params, X)
    z = hidden @ params.W2.T + params.b2
    loss_s = float(cross_entropy(z, labels).mean())
    d_logits = softmax(z)
    d_logits[np.arange(X.shape[0]), labels] -= 1.0
    _backprop(params, X, d_logits * (lambda_s / X.shape[0]), pre_activation, hidden, grad)

    loss_u, used_count = 0.0, 0
    if weak_probs is not None and strong_features is not None:
        weak, strong = _check_unlabeled(params, weak_probs, strong_features)
        batch_size = strong.shape[0] if strong.size else 0
        if batch_size:
            mask = pseudo_label_mask(weak, thresholds)
            used_count = mask.used_count
            if used_count:
                kept = strong[mask.keep]
                pseudo = mask.labels[mask.keep]
                pre_u, hidden_u = _hidden_layer(params, kept)
                z_u = hidden_u @ params.W2.T + params.b2
                loss_u = float(cross_entropy(z_u, pseudo).sum() / batch_size)
                if lambda_u > 0:
                    d_u = softmax(z_u)
                    d_u[np.arange(kept.shape[0]), pseudo] -= 1.0
                    _backprop(params, kept, d_u * (lambda_u / batch_size), pre_u, hidden_u, grad)

    return ObjectiveResult(
        loss_s=loss_s,
        loss_u=loss_u,
        total=total_loss(loss_s, loss_u, lambda_s, lambda_u),
        used_count=used_count,
        grad=grad,
    )


def gradient(params, features, labels, weak_probs=None, strong_features=None, thresholds=None,
             lambda_s=1.0, lambda_u=1.0):
    return objective_and_gradient(
        params, features, labels, weak_probs, strong_features, thresholds, lambda_s, lambda_u
    ).grad


def momentum_direction(velocity, grad, momentum):
    """Heavy-ball direction; with momentum 0 this is the gradient itself."""
    if momentum == 0.0 or velocity is None:
        return grad
    return grad.scaled_add(velocity, momentum)


def sgd_step(params, grad, epoch, schedule):
    """params - lr(epoch) * grad with the cosine-annealed learning rate."""
    check_in_range(epoch, 0, schedule.total_epochs, "epoch", high_inclusive=False)
    return params.scaled_add(grad, -schedule.learning_rate(epoch))
