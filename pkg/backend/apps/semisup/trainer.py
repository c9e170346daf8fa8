"""
Training runs for every method variant, with per-epoch diagnostics.

A run owns one seeded generator and consumes it in a fixed order (init,
then per step: labeled permutation, augmentations, unlabeled draws), so the
whole trajectory is reproducible and can be checkpointed and resumed at any
epoch boundary.
"""
import enum
import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from apps.common.errors import ConfigurationError, UndefinedResultError, check_condition, check_in_range
from apps.common.errors.constants import (
    ERROR_INVALID_CONFIG_VALUE,
    ERROR_MISSING_TEST_CLASS,
    ERROR_OUT_OF_RANGE,
    ERROR_UNDEFINED_CORRELATION,
)

from . import constants
from .core_model import (
    LrSchedule,
    ModelParams,
    forward,
    init_params,
    momentum_direction,
    objective_and_gradient,
    predict,
    sgd_step,
)
from .data_synth import AugmentConfig, DatasetSplits, strong_augment, weak_augment
from .pseudo_label import (
    ClassConfidenceStats,
    MappingKind,
    class_confidence,
    dynamic_threshold,
    fixed_thresholds,
    pseudo_label_mask,
    update_stats,
)
from .resampler import compute_weights, resample_indices, snapshot_predictions


logger = logging.getLogger("semisup.trainer")


class MethodVariant(str, enum.Enum):
    SUPERVISED = "supervised"
    PL = "pl"
    FIXMATCH = "fixmatch"
    CONFID_PL = "confidpl"
    CONFID_MATCH = "confidmatch"
    CONFID_THRESHOLD_ONLY = "confidthresholdonly"
    CONFID_RESAMPLE_ONLY = "confidresampleonly"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        try:
            return cls(key)
        except ValueError as err:
            choices = ", ".join(variant.value for variant in cls)
            raise ConfigurationError(
                ERROR_INVALID_CONFIG_VALUE, f"method={value!r}; expected one of {choices}"
            ) from err

    @property
    def uses_unlabeled(self):
        return self is not MethodVariant.SUPERVISED

    @property
    def strong_augmentation(self):
        return self not in (MethodVariant.SUPERVISED, MethodVariant.PL, MethodVariant.CONFID_PL)

    @property
    def dynamic_threshold(self):
        return self in (
            MethodVariant.CONFID_PL,
            MethodVariant.CONFID_MATCH,
            MethodVariant.CONFID_THRESHOLD_ONLY,
        )

    @property
    def resampling(self):
        return self in (
            MethodVariant.CONFID_PL,
            MethodVariant.CONFID_MATCH,
            MethodVariant.CONFID_RESAMPLE_ONLY,
        )


@dataclass(frozen=True)
class TrainerConfig:
    method: MethodVariant = MethodVariant.CONFID_MATCH
    seed: int = 0
    tau: float = constants.DEFAULT_TAU
    lambda_s: float = constants.DEFAULT_LAMBDA_S
    lambda_u: float = constants.DEFAULT_LAMBDA_U
    batch_size: int = constants.DEFAULT_BATCH_SIZE
    mu: int = constants.DEFAULT_MU
    epochs: int = constants.DEFAULT_EPOCHS
    lr_max: float = constants.DEFAULT_LR_MAX
    lr_min: float = constants.DEFAULT_LR_MIN
    momentum: float = constants.DEFAULT_MOMENTUM
    mapping: MappingKind = MappingKind.CONCAVE
    resample_period: int = constants.DEFAULT_RESAMPLE_PERIOD
    resample_labeled: bool = True
    resample_unlabeled: bool = True
    hidden: int = constants.DEFAULT_HIDDEN
    weak_sigma: float = constants.DEFAULT_WEAK_SIGMA
    strong_sigma: float = constants.DEFAULT_STRONG_SIGMA
    strong_scale_lo: float = constants.DEFAULT_STRONG_SCALE_RANGE[0]
    strong_scale_hi: float = constants.DEFAULT_STRONG_SCALE_RANGE[1]

    def __post_init__(self):
        object.__setattr__(self, "method", MethodVariant.parse(self.method))
        try:
            object.__setattr__(self, "mapping", MappingKind.parse(self.mapping))
        except ValueError as err:
            raise ConfigurationError(ERROR_INVALID_CONFIG_VALUE, str(err)) from err

    @property
    def effective_lambda_u(self):
        return 0.0 if self.method is MethodVariant.SUPERVISED else self.lambda_u

    @property
    def augment(self):
        return AugmentConfig(
            weak_sigma=self.weak_sigma,
            strong_sigma=self.strong_sigma,
            strong_scale_range=(self.strong_scale_lo, self.strong_scale_hi),
        )

    def schedule(self):
        return LrSchedule(self.lr_max, self.lr_min, max(self.epochs, 1))

    def validate(self):
        def positive(name):
            check_condition(getattr(self, name) >= 1, ERROR_OUT_OF_RANGE,
                            f"{name} must be >= 1, got {getattr(self, name)}", ConfigurationError)

        check_in_range(self.tau, 0.5, 1.0, "tau", low_inclusive=False, high_inclusive=False,
                       error_class=ConfigurationError)
        for name in ("batch_size", "mu", "resample_period", "hidden"):
            positive(name)
        check_condition(self.epochs >= 0, ERROR_OUT_OF_RANGE,
                        f"epochs must be >= 0, got {self.epochs}", ConfigurationError)
        check_condition(self.lambda_s >= 0 and self.lambda_u >= 0, ERROR_OUT_OF_RANGE,
                        "lambda_s and lambda_u must be >= 0", ConfigurationError)
        check_in_range(self.momentum, 0.0, 1.0, "momentum", high_inclusive=False,
                       error_class=ConfigurationError)
        self.schedule()
        self.augment.validate()
        return self

    def as_dict(self):
        data = asdict(self)
        data["method"] = self.method.value
        data["mapping"] = self.mapping.value
        return data

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in known})


@dataclass
class MetricsRecord:
    epoch: int
    overall_acc: float
    mean_class_acc: float
    per_class_acc: list
    per_class_P: list  # None for classes nothing was assigned to
    thresholds: list
    pseudo_label_ratio: float
    pseudo_label_precision: float | None
    pseudo_label_counts: list
    loss_s: float
    loss_u: float
    learning_rate: float

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class _EpochTally:
    """Running sums over the steps of one epoch."""
    num_classes: int
    loss_s: float = 0.0
    loss_u: float = 0.0
    steps: int = 0
    drawn: int = 0
    kept: int = 0
    kept_correct: int = 0
    kept_per_class: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kept_per_class is None:
            self.kept_per_class = np.zeros(self.num_classes, dtype=np.int64)


def evaluate(params, test, num_classes=None):
    """
    Overall accuracy, class-mean accuracy and per-class accuracy on raw test features.

    Every class 0..C-1 must be present in the test set.
    """
    num_classes = num_classes or params.num_classes
    labels = np.asarray(test.labels, dtype=np.int64)
    check_condition(labels.size > 0, ERROR_MISSING_TEST_CLASS, "test set is empty", ConfigurationError)
    counts = np.bincount(labels, minlength=num_classes)
    missing = np.flatnonzero(counts[:num_classes] == 0)
    if missing.size:
        raise ConfigurationError(ERROR_MISSING_TEST_CLASS, f"class {int(missing[0])} missing from test set")
    correct = predict(params, test.features) == labels
    per_class = np.bincount(labels, weights=correct, minlength=num_classes) / counts
    return float(correct.mean()), float(per_class.mean()), per_class


def confidence_accuracy_correlation(record):
    """Pearson correlation between per-class confidence and per-class test accuracy."""
    confidence = record.per_class_P
    accuracy = record.per_class_acc
    check_condition(len(confidence) >= 3, ERROR_OUT_OF_RANGE, "need at least 3 classes")
    if any(value is None for value in confidence):
        raise UndefinedResultError(ERROR_UNDEFINED_CORRELATION, "some classes have no confidence estimate")
    x = np.asarray(confidence, dtype=np.float64)
    y = np.asarray(accuracy, dtype=np.float64)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float((dx * dx).sum()), float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedResultError(ERROR_UNDEFINED_CORRELATION)
    return float((dx * dy).sum() / math.sqrt(sxx * syy))


class SemiSupervisedTrainer:
    """
    Owns every piece of mutable state of one run.

    Usage:
        trainer = SemiSupervisedTrainer(config, splits)
        trainer.run()
        trainer.records, trainer.params
    """

    def __init__(self, config, splits, rng=None):
        self.config = config.validate()
        self.splits = splits
        self.num_classes = splits.num_classes
        self.schedule = config.schedule()
        self.augment = config.augment
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.params = init_params(splits.d_in, config.hidden, self.num_classes, self.rng)
        self.initial_params = self.params.copy()
        self.velocity = None
        self.epoch = 0
        self.thresholds = fixed_thresholds(self.num_classes, config.tau)
        self.stats = ClassConfidenceStats.fresh(self.num_classes)
        self.labeled_pool = np.arange(len(splits.labeled))
        self.unlabeled_pool = np.arange(len(splits.unlabeled))
        self.records = []

    @property
    def uses_unlabeled(self):
        return self.config.method.uses_unlabeled and len(self.splits.unlabeled) > 0

    @property
    def finished(self):
        return self.epoch >= self.config.epochs

    def run(self, until_epoch=None, on_epoch_end=None):
        """Train up to until_epoch (default: all epochs); returns the records so far."""
        until = self.config.epochs if until_epoch is None else min(until_epoch, self.config.epochs)
        while self.epoch < until:
            record = self._run_epoch(self.epoch)
            if on_epoch_end is not None:
                on_epoch_end(self, record)
        return self.records

    def _run_epoch(self, epoch):
        config = self.config
        labeled, unlabeled = self.splits.labeled, self.splits.unlabeled
        hidden_labels = unlabeled.diagnostic_labels()
        tally = _EpochTally(self.num_classes)
        stats = ClassConfidenceStats.fresh(self.num_classes)
        thresholds_used = self.thresholds.copy()
        unlabeled_batch = config.mu * config.batch_size

        order = self.rng.permutation(self.labeled_pool)
        for start in range(0, order.size, config.batch_size):
            idx = order[start:start + config.batch_size]
            x = weak_augment(labeled.features[idx], self.augment, self.rng)
            y = labeled.labels[idx]

            weak_probs = student_view = None
            if self.uses_unlabeled:
                u_idx = self.unlabeled_pool[self.rng.integers(0, self.unlabeled_pool.size, size=unlabeled_batch)]
                u = unlabeled.features[u_idx]
                weak_probs = forward(self.params, weak_augment(u, self.augment, self.rng))
                if config.method.strong_augmentation:
                    student_view = strong_augment(u, self.augment, self.rng)
                else:
                    student_view = weak_augment(u, self.augment, self.rng)
                stats = update_stats(stats, weak_probs)
                mask = pseudo_label_mask(weak_probs, self.thresholds)
                tally.drawn += u_idx.size
                tally.kept += mask.used_count
                tally.kept_correct += int((mask.keep & (mask.labels == hidden_labels[u_idx])).sum())
                tally.kept_per_class += mask.kept_per_class(self.num_classes)

            result = objective_and_gradient(
                self.params, x, y, weak_probs, student_view, self.thresholds,
                config.lambda_s, config.effective_lambda_u,
            )
            direction = momentum_direction(self.velocity, result.grad, config.momentum)
            if config.momentum > 0.0:
                self.velocity = direction
            self.params = sgd_step(self.params, direction, epoch, self.schedule)
            tally.loss_s += result.loss_s
            tally.loss_u += result.loss_u
            tally.steps += 1
            logger.debug(
                f"epoch {epoch} step {tally.steps}: l_s={result.loss_s:.4f} "
                f"l_u={result.loss_u:.4f} kept={result.used_count}"
            )

        self.params.validate()
        self.stats = stats
        conf = class_confidence(stats)
        record = self._record(epoch, conf, thresholds_used, tally)
        self.records.append(record)

        if config.method.dynamic_threshold and self.uses_unlabeled:
            self.thresholds = dynamic_threshold(conf, config.tau, config.mapping)
        completed = epoch + 1
        if (config.method.resampling and completed % config.resample_period == 0
                and completed < config.epochs):
            self._resample(completed, conf)
        self.epoch = completed

        logger.info(
            f"epoch {completed}/{config.epochs} [{config.method.value}] "
            f"overall={record.overall_acc:.4f} mean={record.mean_class_acc:.4f} "
            f"ratio={record.pseudo_label_ratio:.3f} l_s={record.loss_s:.4f} l_u={record.loss_u:.4f}"
        )
        return record

    def _record(self, epoch, conf, thresholds_used, tally):
        overall, mean_class, per_class = evaluate(self.params, self.splits.test, self.num_classes)
        steps = max(tally.steps, 1)
        return MetricsRecord(
            epoch=epoch,
            overall_acc=overall,
            mean_class_acc=mean_class,
            per_class_acc=per_class.tolist(),
            per_class_P=conf.as_list(),
            thresholds=thresholds_used.tolist(),
            pseudo_label_ratio=tally.kept / tally.drawn if tally.drawn else 0.0,
            pseudo_label_precision=tally.kept_correct / tally.kept if tally.kept else None,
            pseudo_label_counts=tally.kept_per_class.tolist(),
            loss_s=tally.loss_s / steps,
            loss_u=tally.loss_u / steps,
            learning_rate=self.schedule.learning_rate(epoch),
        )

    def _resample(self, completed, conf):
        """Rebuild the labeled and unlabeled index pools from the current learning status."""
        config = self.config
        labeled, unlabeled = self.splits.labeled, self.splits.unlabeled
        if config.resample_labeled and len(labeled):
            _, confidence = snapshot_predictions(self.params, labeled.features, self.rng, self.augment)
            table = compute_weights(labeled.labels, confidence, conf, completed, config.epochs, config.tau)
            self.labeled_pool = resample_indices(table, len(labeled), self.rng)
        if config.resample_unlabeled and self.uses_unlabeled:
            classes, confidence = snapshot_predictions(self.params, unlabeled.features, self.rng, self.augment)
            table = compute_weights(classes, confidence, conf, completed, config.epochs, config.tau)
            self.unlabeled_pool = resample_indices(table, len(unlabeled), self.rng)
        logger.info(f"Re-sampled data pools after epoch {completed}")

    def state_dict(self):
        return {
            "config": self.config.as_dict(),
            "epoch": self.epoch,
            "params": self.params.as_dict(),
            "initial_params": self.initial_params.as_dict(),
            "velocity": self.velocity.as_dict() if self.velocity is not None else None,
            "thresholds": self.thresholds.tolist(),
            "stats": self.stats.as_dict(),
            "labeled_pool": self.labeled_pool.tolist(),
            "unlabeled_pool": self.unlabeled_pool.tolist(),
            "rng_state": self.rng.bit_generator.state,
            "records": [record.as_dict() for record in self.records],
        }

    @classmethod
    def from_state_dict(cls, state, splits):
        config = TrainerConfig.from_dict(state["config"])
        trainer = cls(config, splits)
        trainer.epoch = int(state["epoch"])
        trainer.params = ModelParams.from_dict(state["params"]).validate()
        trainer.initial_params = ModelParams.from_dict(state["initial_params"])
        trainer.velocity = ModelParams.from_dict(state["velocity"]) if state["velocity"] else None
        trainer.thresholds = np.asarray(state["thresholds"], dtype=np.float64)
        trainer.stats = ClassConfidenceStats.from_dict(state["stats"])
        trainer.labeled_pool = np.asarray(state["labeled_pool"], dtype=np.int64)
        trainer.unlabeled_pool = np.asarray(state["unlabeled_pool"], dtype=np.int64)
        trainer.rng.bit_generator.state = state["rng_state"]
        trainer.records = [MetricsRecord.from_dict(record) for record in state["records"]]
        return trainer


def train(config, labeled, unlabeled, test, rng=None):
    """Run a full training; returns (metrics records, final parameters)."""
    num_classes = int(max(labeled.labels.max(), test.labels.max())) + 1
    splits = DatasetSplits(labeled=labeled, unlabeled=unlabeled, test=test,
                           num_classes=num_classes, d_in=labeled.features.shape[1])
    trainer = SemiSupervisedTrainer(config, splits, rng=rng)
    trainer.run()
    return trainer.records, trainer.params
