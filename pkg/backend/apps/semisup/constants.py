# Pseudo-labeling
DEFAULT_TAU = 0.8
DEFAULT_LAMBDA_S = 1.0
DEFAULT_LAMBDA_U = 1.0

# Re-sampling
WEIGHT_FLOOR = 1e-3
WARM_SHARPNESS = 5.0
EXPONENTIAL_MAPPING_SHARPNESS = 5.0

# Optimisation (150 epochs of a few steps each need a larger peak step size)
DEFAULT_LR_MAX = 0.1
DEFAULT_LR_MIN = 0.0001
DEFAULT_HIDDEN = 32
DEFAULT_MOMENTUM = 0.0

# Desk-scale schedule (500 epochs / reload every 50 scaled down)
DEFAULT_BATCH_SIZE = 24
DEFAULT_MU = 4
DEFAULT_EPOCHS = 150
DEFAULT_RESAMPLE_PERIOD = 15

# Dataset splits
TEST_FRACTION = 0.2
DEFAULT_LABELED_FRACTION = 0.1

# Shipped benchmark: 8 imbalanced classes, two hard ones (1 is a majority
# class, 6 a minority class) with wide spread and a mean pulled toward a neighbour.
DEFAULT_CLASS_COUNTS = (400, 280, 200, 140, 100, 70, 50, 35)
DEFAULT_D_IN = 16
DEFAULT_MEAN_RADIUS = 3.0
DEFAULT_CLASS_SCALE = 1.0
DEFAULT_HARD_CLASS_SCALE = 1.6
DEFAULT_HARD_CLASSES = {1: 0, 6: 5}  # hard class -> neighbour it leans toward
DEFAULT_HARD_PULL = 0.45

# Augmentations (feature-space analogues of rotation / scale / jitter)
DEFAULT_WEAK_SIGMA = 0.1
DEFAULT_STRONG_SIGMA = 0.6
DEFAULT_STRONG_SCALE_RANGE = (0.8, 1.2)

# Output files
MANIFEST_FILENAME = "manifest.json"
METRICS_FILENAME = "metrics.jsonl"
SUMMARY_FILENAME = "summary.csv"
CHECKPOINT_FILENAME = "checkpoint.json"
SWEEP_RUNS_FILENAME = "runs.csv"
SWEEP_AGGREGATE_FILENAME = "aggregate.csv"
SUMMARY_HEADER = ("method", "seed", "overall_acc", "mean_acc")

CHECKPOINT_FORMAT = "confidmatch-checkpoint"
CHECKPOINT_VERSION = 1
SWEEP_DATASET_FILENAME = "dataset.csv"
SWEEP_CELLS_DIRNAME = "cells"
SWEEP_DATA_KEYS = ("seeds", "dataset", "spec", "dataset_seed", "labeled_fraction")
DEFAULT_DATASET_SEED = 0

REPORT_UTILIZATION_POINTS = 10

TOOL_VERSION = "0.1.0"
