"""
Seeded synthetic imbalanced classification data.

Each class is an isotropic Gaussian; class counts control imbalance and class
scales control learning difficulty independently. Populations are split per
class into labeled / test / unlabeled subsets and written to a CSV layout:

    id,label,split,f0,...,f{d-1}
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from decouple import Csv

from apps.common.config_files import IniSettings, format_ini
from apps.common.errors import ConfigurationError, DataError, check_condition, check_in_range
from apps.common.errors.constants import (
    ERROR_CLASS_TOO_SMALL,
    ERROR_DATASET_NOT_FOUND,
    ERROR_INVALID_DATASET_SPEC,
    ERROR_MALFORMED_DATASET,
)
from apps.common.utils.number_utils import format_float

from .constants import (
    DEFAULT_CLASS_COUNTS,
    DEFAULT_CLASS_SCALE,
    DEFAULT_D_IN,
    DEFAULT_HARD_CLASS_SCALE,
    DEFAULT_HARD_CLASSES,
    DEFAULT_HARD_PULL,
    DEFAULT_MEAN_RADIUS,
    DEFAULT_STRONG_SCALE_RANGE,
    DEFAULT_STRONG_SIGMA,
    DEFAULT_WEAK_SIGMA,
    TEST_FRACTION,
)


logger = logging.getLogger("semisup.data")

SPLITS = ("labeled", "unlabeled", "test")
SPEC_KEYS = ("class_counts", "class_scales", "d_in", "class_means", "mean_radius")


@dataclass(frozen=True)
class DatasetSpec:
    class_counts: tuple
    class_means: np.ndarray  # [C, d_in]
    class_scales: tuple
    d_in: int

    @property
    def num_classes(self):
        return len(self.class_counts)

    def validate(self):
        def fail(detail):
            raise ConfigurationError(ERROR_INVALID_DATASET_SPEC, detail)

        if self.num_classes < 2:
            fail(f"class_counts: need at least 2 classes, got {self.num_classes}")
        if any(count < 2 for count in self.class_counts):
            fail(f"class_counts: every count must be >= 2, got {list(self.class_counts)}")
        if len(self.class_scales) != self.num_classes:
            fail(f"class_scales: expected {self.num_classes} values, got {len(self.class_scales)}")
        if any(not scale > 0 for scale in self.class_scales):
            fail(f"class_scales: every scale must be > 0, got {list(self.class_scales)}")
        if self.d_in < 1:
            fail(f"d_in: must be >= 1, got {self.d_in}")
        if self.class_means.shape != (self.num_classes, self.d_in):
            fail(f"class_means: expected shape ({self.num_classes}, {self.d_in}), "
                 f"got {self.class_means.shape}")
        if not np.all(np.isfinite(self.class_means)):
            fail("class_means: entries must be finite")
        return self

    def as_ini_values(self):
        return {
            "class_counts": ",".join(str(count) for count in self.class_counts),
            "class_scales": ",".join(format_float(scale) for scale in self.class_scales),
            "d_in": str(self.d_in),
            "class_means": ";".join(",".join(format_float(v) for v in row) for row in self.class_means),
        }


@dataclass(frozen=True)
class Population:
    features: np.ndarray  # [n, d_in]
    labels: np.ndarray  # [n]

    @property
    def num_classes(self):
        return int(self.labels.max()) + 1 if self.labels.size else 0


@dataclass(frozen=True)
class LabeledSet:
    ids: np.ndarray
    features: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return self.ids.shape[0]


@dataclass(frozen=True)
class TestSet(LabeledSet):
    pass


@dataclass(frozen=True)
class UnlabeledSet:
    """Unlabeled features; true labels are kept apart for diagnostics only."""
    ids: np.ndarray
    features: np.ndarray
    _hidden_labels: np.ndarray = field(repr=False)

    def __len__(self):
        return self.ids.shape[0]

    def diagnostic_labels(self):
        """True labels, for pseudo-label precision reporting. Never train on these."""
        return self._hidden_labels


@dataclass(frozen=True)
class DatasetSplits:
    labeled: LabeledSet
    unlabeled: UnlabeledSet
    test: TestSet
    num_classes: int
    d_in: int


@dataclass(frozen=True)
class AugmentConfig:
    weak_sigma: float = DEFAULT_WEAK_SIGMA
    strong_sigma: float = DEFAULT_STRONG_SIGMA
    strong_scale_range: tuple = DEFAULT_STRONG_SCALE_RANGE

    def validate(self):
        low, high = self.strong_scale_range
        check_condition(
            0.0 <= self.weak_sigma < self.strong_sigma, ERROR_INVALID_DATASET_SPEC,
            f"need 0 <= weak_sigma < strong_sigma, got {self.weak_sigma}, {self.strong_sigma}",
            ConfigurationError,
        )
        check_condition(
            0.0 < low <= 1.0 <= high, ERROR_INVALID_DATASET_SPEC,
            f"strong_scale_range must satisfy 0 < lo <= 1 <= hi, got ({low}, {high})",
            ConfigurationError,
        )
        return self


def orthogonal_means(num_classes, d_in, radius):
    """Class c sits at radius * e_(c mod d_in)."""
    means = np.zeros((num_classes, d_in))
    for c in range(num_classes):
        means[c, c % d_in] = radius
    return means


def default_spec():
    """The shipped 8-class benchmark."""
    num_classes = len(DEFAULT_CLASS_COUNTS)
    means = orthogonal_means(num_classes, DEFAULT_D_IN, DEFAULT_MEAN_RADIUS)
    scales = [DEFAULT_CLASS_SCALE] * num_classes
    for hard, neighbour in DEFAULT_HARD_CLASSES.items():
        means[hard] = (1.0 - DEFAULT_HARD_PULL) * means[hard] + DEFAULT_HARD_PULL * means[neighbour]
        scales[hard] = DEFAULT_HARD_CLASS_SCALE
    return DatasetSpec(
        class_counts=DEFAULT_CLASS_COUNTS,
        class_means=means,
        class_scales=tuple(scales),
        d_in=DEFAULT_D_IN,
    ).validate()


def _parse_means(raw, key="class_means"):
    try:
        rows = [[float(v) for v in row.split(",")] for row in raw.split(";") if row.strip()]
        return np.asarray(rows, dtype=np.float64)
    except ValueError as err:
        raise ConfigurationError(ERROR_INVALID_DATASET_SPEC, f"{key}: cannot parse {raw!r}") from err


def load_spec(path):
    """
    Read a dataset spec INI file.

    Keys: class_counts, class_scales, d_in and either class_means (rows
    separated by ';') or mean_radius for orthogonal means.
    """
    settings = IniSettings(path, allowed_keys=SPEC_KEYS)
    for key in ("class_counts", "class_scales", "d_in"):
        if key not in settings:
            raise ConfigurationError(ERROR_INVALID_DATASET_SPEC, f"{key}: missing")
    counts = tuple(settings.get("class_counts", cast=Csv(cast=int)))
    scales = tuple(settings.get("class_scales", cast=Csv(cast=float)))
    d_in = settings.get("d_in", cast=int)
    if "class_means" in settings:
        means = _parse_means(settings.raw("class_means"))
    else:
        radius = settings.get("mean_radius", default=DEFAULT_MEAN_RADIUS, cast=float)
        means = orthogonal_means(len(counts), d_in, radius)
    return DatasetSpec(class_counts=counts, class_means=means, class_scales=scales, d_in=d_in).validate()


def dump_spec(spec):
    return format_ini(spec.as_ini_values())


def generate(spec, seed):
    """class_counts[c] Gaussian draws per class, classes in order."""
    spec.validate()
    rng = np.random.default_rng(seed)
    features, labels = [], []
    for c, count in enumerate(spec.class_counts):
        features.append(rng.normal(spec.class_means[c], spec.class_scales[c], size=(count, spec.d_in)))
        labels.append(np.full(count, c, dtype=np.int64))
    return Population(features=np.vstack(features), labels=np.concatenate(labels))


def split_sizes(count, labeled_fraction):
    """(labeled, test, unlabeled) sizes for one class."""
    # round() strips float noise such as 0.1 * 70 = 7.000000000000001
    n_labeled = max(1, math.ceil(round(labeled_fraction * count, 9)))
    n_test = max(1, math.floor(round(TEST_FRACTION * count, 9)))
    return n_labeled, n_test, count - n_labeled - n_test


def split(population, labeled_fraction, seed):
    """Stratified, disjoint, exhaustive labeled / unlabeled / test split."""
    check_in_range(labeled_fraction, 0.0, 1.0, "labeled_fraction", low_inclusive=False,
                   high_inclusive=False, error_class=ConfigurationError)
    rng = np.random.default_rng(seed)
    num_classes = population.num_classes
    parts = {name: [] for name in SPLITS}
    for c in range(num_classes):
        members = np.flatnonzero(population.labels == c)
        n_labeled, n_test, n_unlabeled = split_sizes(members.size, labeled_fraction)
        if n_unlabeled < 0:
            raise ConfigurationError(
                ERROR_CLASS_TOO_SMALL,
                f"class {c} has {members.size} samples, needs {n_labeled} labeled + {n_test} test",
            )
        members = rng.permutation(members)
        parts["labeled"].append(members[:n_labeled])
        parts["test"].append(members[n_labeled:n_labeled + n_test])
        parts["unlabeled"].append(members[n_labeled + n_test:])
    indices = {name: np.sort(np.concatenate(chunks)) for name, chunks in parts.items()}
    return _splits_from_indices(population, indices, num_classes)


def _splits_from_indices(population, indices, num_classes):
    def take(name):
        idx = indices[name]
        return idx, population.features[idx], population.labels[idx]

    ids, features, labels = take("labeled")
    labeled = LabeledSet(ids=ids, features=features, labels=labels)
    ids, features, labels = take("test")
    test = TestSet(ids=ids, features=features, labels=labels)
    ids, features, labels = take("unlabeled")
    unlabeled = UnlabeledSet(ids=ids, features=features, _hidden_labels=labels)
    return DatasetSplits(labeled=labeled, unlabeled=unlabeled, test=test,
                         num_classes=num_classes, d_in=population.features.shape[1])


def weak_augment(x, cfg, rng):
    """x + N(0, weak_sigma^2); returns a new array."""
    x = np.asarray(x, dtype=np.float64)
    return x + rng.normal(0.0, cfg.weak_sigma, size=x.shape)


def strong_augment(x, cfg, rng):
    """s * x + N(0, strong_sigma^2), s ~ U(strong_scale_range) per instance."""
    x = np.asarray(x, dtype=np.float64)
    low, high = cfg.strong_scale_range
    scale_shape = x.shape[:-1] + (1,) if x.ndim > 1 else ()
    scale = rng.uniform(low, high, size=scale_shape)
    return scale * x + rng.normal(0.0, cfg.strong_sigma, size=x.shape)


def nearest_mean_accuracy(population, spec):
    """Accuracy of assigning every sample to the closest class mean."""
    distances = ((population.features[:, None, :] - spec.class_means[None, :, :]) ** 2).sum(axis=2)
    return float((distances.argmin(axis=1) == population.labels).mean())


def write_dataset_csv(population, splits, path):
    """Write every population row once, in id order, tagged with its split."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    split_of = np.empty(population.labels.shape[0], dtype=object)
    split_of[splits.labeled.ids] = "labeled"
    split_of[splits.unlabeled.ids] = "unlabeled"
    split_of[splits.test.ids] = "test"
    d_in = population.features.shape[1]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", "label", "split"] + [f"f{j}" for j in range(d_in)])
        for i, (row, label) in enumerate(zip(population.features, population.labels, strict=True)):
            writer.writerow([i, int(label), split_of[i]] + [format_float(v) for v in row])
    logger.info(f"Wrote {population.labels.shape[0]} rows to {path}")
    return path


def read_dataset_csv(path):
    """Parse the CSV layout back into population-ordered splits."""
    path = Path(path)
    if not path.is_file():
        raise DataError(ERROR_DATASET_NOT_FOUND, f"{path} does not exist")

    def malformed(detail):
        return DataError(ERROR_MALFORMED_DATASET, f"{path}: {detail}")

    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[:3] != ["id", "label", "split"]:
            raise malformed("header must start with id,label,split")
        d_in = len(header) - 3
        if d_in < 1 or header[3:] != [f"f{j}" for j in range(d_in)]:
            raise malformed("feature columns must be f0..f{d-1}")
        ids, labels, splits, features = [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != d_in + 3:
                raise malformed(f"line {line_no}: expected {d_in + 3} fields, got {len(row)}")
            if row[2] not in SPLITS:
                raise malformed(f"line {line_no}: unknown split {row[2]!r}")
            try:
                ids.append(int(row[0]))
                labels.append(int(row[1]))
                features.append([float(v) for v in row[3:]])
            except ValueError as err:
                raise malformed(f"line {line_no}: {err}") from err
            splits.append(row[2])

    if not ids:
        raise malformed("no data rows")
    ids = np.asarray(ids, dtype=np.int64)
    if not np.array_equal(np.sort(ids), np.arange(ids.size)):
        raise malformed("ids must be 0..n-1 without gaps or repeats")
    order = np.argsort(ids)
    labels_arr = np.asarray(labels, dtype=np.int64)[order]
    if labels_arr.min() < 0:
        raise malformed("labels must be non-negative")
    population = Population(features=np.asarray(features, dtype=np.float64)[order], labels=labels_arr)
    split_arr = np.asarray(splits, dtype=object)[order]
    indices = {name: np.flatnonzero(split_arr == name) for name in SPLITS}
    num_classes = population.num_classes
    for name in ("labeled", "test"):
        present = np.unique(population.labels[indices[name]])
        if present.size != num_classes:
            raise malformed(f"{name} split does not contain every class")
    return population, _splits_from_indices(population, indices, num_classes)
