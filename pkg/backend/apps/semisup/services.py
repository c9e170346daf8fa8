"""
Run orchestration behind the management commands.

Every run lives in its own directory:
    manifest.json   config snapshot, dataset path and digest, tool version, timestamps
    metrics.jsonl   one MetricsRecord per epoch
    summary.csv     method,seed,overall_acc,mean_acc of the final model
    checkpoint.json full trainer state at the last completed epoch
"""
import csv
import hashlib
import itertools
import json
import logging
import multiprocessing
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
from celery import group
from decouple import Csv
from django.conf import settings

from apps.common.config_files import IniSettings
from apps.common.correlation import run_correlation
from apps.common.errors import (
    ConfigurationError,
    DataError,
    InvariantViolation,
    SemiSupError,
    UndefinedResultError,
)
from apps.common.errors.constants import (
    ERROR_EMPTY_GRID,
    ERROR_INVALID_CONFIG_VALUE,
    ERROR_MALFORMED_CHECKPOINT,
    ERROR_RUN_NOT_FOUND,
    ERROR_SWEEP_CELL_FAILED,
)
from apps.common.utils.number_utils import format_float, to_jsonable

from . import constants, data_synth
from .checkpoint import load_checkpoint, restore_trainer, save_checkpoint
from .config import TRAINER_KEYS, config_from_values, parse_value
from .pseudo_label import ClassConfidence, confidence_balance
from .trainer import (
    MetricsRecord,
    SemiSupervisedTrainer,
    TrainerConfig,
    confidence_accuracy_correlation,
    evaluate,
)

UTC = timezone.utc  # datetime.UTC is 3.11+; same object


logger = logging.getLogger("semisup.services")
sweep_logger = logging.getLogger("semisup.sweep")


def _now():
    return datetime.now(UTC).isoformat()


def file_sha256(path):
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def output_root():
    return Path(settings.SEMISUP_OUTPUT_ROOT)


# Datasets

def generate_dataset(spec, seed, labeled_fraction, out_path):
    """Generate, split and write one dataset CSV; returns (path, population, splits)."""
    population = data_synth.generate(spec, seed)
    splits = data_synth.split(population, labeled_fraction, seed)
    path = data_synth.write_dataset_csv(population, splits, out_path)
    logger.info(
        f"Dataset seed={seed}: {len(splits.labeled)} labeled, {len(splits.unlabeled)} unlabeled, "
        f"{len(splits.test)} test; nearest-mean accuracy "
        f"{data_synth.nearest_mean_accuracy(population, spec):.4f}"
    )
    return path, population, splits


# Single runs

@dataclass
class RunManifest:
    run_id: str
    config: dict
    dataset_path: str
    dataset_sha256: str
    output_dir: str
    tool_version: str = constants.TOOL_VERSION
    created_at: str = field(default_factory=_now)
    resumed_from: str | None = None
    stop_after: int | None = None
    epochs_completed: int = 0
    finished_at: str | None = None

    def trainer_config(self):
        return TrainerConfig.from_dict(self.config)

    def write(self, run_dir):
        path = Path(run_dir) / constants.MANIFEST_FILENAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, run_dir):
        path = Path(run_dir) / constants.MANIFEST_FILENAME
        if not path.is_file():
            raise DataError(ERROR_RUN_NOT_FOUND, f"{path} does not exist")
        try:
            return cls(**json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, TypeError) as err:
            raise DataError(ERROR_RUN_NOT_FOUND, f"{path}: {err}") from err


@dataclass
class RunResult:
    run_dir: Path
    manifest: RunManifest
    records: list
    summary: dict | None
    finished: bool


def write_metrics(records, path):
    lines = [json.dumps(to_jsonable(record.as_dict()), allow_nan=False) for record in records]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def read_metrics(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(ERROR_RUN_NOT_FOUND, f"{path} does not exist")
    records = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(MetricsRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError) as err:
                raise DataError(ERROR_RUN_NOT_FOUND, f"{path}: line {line_no}: {err}") from err
    return records


def summary_row(trainer):
    overall, mean_class, _ = evaluate(trainer.params, trainer.splits.test, trainer.num_classes)
    return {
        "method": trainer.config.method.value,
        "seed": trainer.config.seed,
        "overall_acc": overall,
        "mean_acc": mean_class,
    }


def write_summary(row, path):
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(constants.SUMMARY_HEADER)
        writer.writerow([row["method"], row["seed"], format_float(row["overall_acc"]),
                         format_float(row["mean_acc"])])
    return path


def default_run_dir(config):
    return output_root() / f"{config.method.value}-seed{config.seed}"


def run_training(config, dataset_path, out_dir=None, *, stop_after=None, resume=None, run_id=None):
    """
    Train (or resume) one run and write its directory.

    stop_after is an absolute epoch count: the run stops once that many
    epochs are complete and leaves a checkpoint to resume from.
    """
    dataset_path = Path(dataset_path).resolve()
    _, splits = data_synth.read_dataset_csv(dataset_path)
    dataset_sha = file_sha256(dataset_path)

    if resume is not None:
        payload = load_checkpoint(resume)
        if payload.get("dataset_sha256") not in (None, dataset_sha):
            raise DataError(ERROR_MALFORMED_CHECKPOINT, f"{resume} was written for a different dataset")
        trainer = restore_trainer(payload, splits)
        if config is not None and config != trainer.config:
            logger.warning("Resuming with the checkpointed config; the given config is ignored")
        run_dir = Path(out_dir) if out_dir else Path(resume).resolve().parent
    else:
        trainer = SemiSupervisedTrainer(config, splits)
        run_dir = Path(out_dir) if out_dir else default_run_dir(config)
    run_dir.mkdir(parents=True, exist_ok=True)

    with run_correlation(run_id) as active_id:
        manifest = RunManifest(
            run_id=active_id,
            config=trainer.config.as_dict(),
            dataset_path=str(dataset_path),
            dataset_sha256=dataset_sha,
            output_dir=str(run_dir.resolve()),
            resumed_from=str(resume) if resume is not None else None,
            stop_after=stop_after,
            epochs_completed=trainer.epoch,
        )
        manifest.write(run_dir)
        logger.info(
            f"Run {trainer.config.method.value} seed={trainer.config.seed} starting at epoch "
            f"{trainer.epoch}/{trainer.config.epochs} in {run_dir}"
        )

        trainer.run(until_epoch=stop_after)

        write_metrics(trainer.records, run_dir / constants.METRICS_FILENAME)
        save_checkpoint(trainer, run_dir / constants.CHECKPOINT_FILENAME, dataset_sha)
        summary = None
        if trainer.finished:
            summary = summary_row(trainer)
            write_summary(summary, run_dir / constants.SUMMARY_FILENAME)
            manifest.finished_at = _now()
        manifest.epochs_completed = trainer.epoch
        manifest.write(run_dir)
        logger.info(f"Run stopped after epoch {trainer.epoch}; outputs in {run_dir}")

    return RunResult(run_dir=run_dir, manifest=manifest, records=trainer.records,
                     summary=summary, finished=trainer.finished)


# Sweeps

@dataclass(frozen=True)
class SweepGrid:
    """Comma lists in a grid file are axes; single values are fixed for every cell."""
    axes: dict
    fixed: dict
    seeds: tuple
    dataset: Path | None = None
    spec: Path | None = None
    dataset_seed: int = constants.DEFAULT_DATASET_SEED
    labeled_fraction: float = constants.DEFAULT_LABELED_FRACTION

    @property
    def cell_count(self):
        count = len(self.seeds)
        for values in self.axes.values():
            count *= len(values)
        return count


def load_grid(path):
    path = Path(path)
    ini = IniSettings(path, allowed_keys=TRAINER_KEYS + constants.SWEEP_DATA_KEYS)
    if "seed" in ini:
        raise ConfigurationError(ERROR_INVALID_CONFIG_VALUE, f"{path}: list training seeds under 'seeds'")

    seeds = tuple(ini.get("seeds", default=(), cast=Csv(cast=int, post_process=tuple)))
    if not seeds:
        raise ConfigurationError(ERROR_EMPTY_GRID, f"{path}: no training seeds")

    axes, fixed = {}, {}
    for key in TRAINER_KEYS:
        if key == "seed" or key not in ini:
            continue
        values = tuple(ini.get(key, cast=Csv(post_process=tuple)))
        if not values:
            raise ConfigurationError(ERROR_EMPTY_GRID, f"{path}: '{key}' lists no values")
        for value in values:
            parse_value(key, value)
        if len(values) > 1:
            axes[key] = values
        else:
            fixed[key] = values[0]

    def relative(key):
        raw = ini.get(key)
        if not raw:
            return None
        candidate = Path(raw)
        return candidate if candidate.is_absolute() else (path.parent / candidate).resolve()

    return SweepGrid(
        axes=axes,
        fixed=fixed,
        seeds=seeds,
        dataset=relative("dataset"),
        spec=relative("spec"),
        dataset_seed=ini.get("dataset_seed", default=constants.DEFAULT_DATASET_SEED, cast=int),
        labeled_fraction=ini.get("labeled_fraction", default=constants.DEFAULT_LABELED_FRACTION,
                                 cast=float),
    )


def sweep_cells(grid, dataset_path, out_dir):
    """JSON-serialisable cell payloads: axis combinations in file order, seeds innermost."""
    axis_keys = list(grid.axes)
    payloads = []
    for combo in itertools.product(*grid.axes.values()):
        axes = dict(zip(axis_keys, combo, strict=True))
        for seed in grid.seeds:
            index = len(payloads)
            values = {**grid.fixed, **axes, "seed": str(seed)}
            config_from_values(values)
            payloads.append({
                "index": index,
                "axes": axes,
                "seed": seed,
                "values": values,
                "dataset_path": str(dataset_path),
                "run_dir": str(Path(out_dir) / constants.SWEEP_CELLS_DIRNAME / f"cell-{index:04d}"),
            })
    return payloads


def execute_cell(payload):
    """Run one sweep cell and return its row for runs.csv."""
    index = payload["index"]
    try:
        config = config_from_values(payload["values"])
        result = run_training(config, payload["dataset_path"], payload["run_dir"])
    except SemiSupError:
        raise
    except Exception as err:
        sweep_logger.error(f"Sweep cell {index} failed", exc_info=True)
        raise InvariantViolation(ERROR_SWEEP_CELL_FAILED, f"cell {index}: {err}") from err
    sweep_logger.info(f"Sweep cell {index} done: mean_acc={result.summary['mean_acc']:.4f}")
    return {
        "cell": index,
        **payload["axes"],
        "method": result.summary["method"],
        "seed": result.summary["seed"],
        "overall_acc": result.summary["overall_acc"],
        "mean_acc": result.summary["mean_acc"],
    }


def dispatch_cells(payloads, jobs=1):
    """
    Run cells through Celery workers when a broker is configured, else locally.

    Returned rows are ordered by cell index whatever the completion order.
    """
    from .tasks import run_sweep_cell

    if settings.CELERY_BROKER_URL and not settings.CELERY_TASK_ALWAYS_EAGER:
        sweep_logger.info(f"Dispatching {len(payloads)} cells to Celery workers")
        job = group(run_sweep_cell.s(payload) for payload in payloads).apply_async()
        rows = job.get(timeout=settings.SEMISUP_SWEEP_RESULT_TIMEOUT)
    elif jobs > 1 and len(payloads) > 1:
        sweep_logger.info(f"Running {len(payloads)} cells on {jobs} local workers")
        with multiprocessing.Pool(processes=min(jobs, len(payloads))) as pool:
            rows = pool.map(execute_cell, payloads)
    else:
        rows = [run_sweep_cell(payload) for payload in payloads]
    return sorted(rows, key=lambda row: row["cell"])


def _population_std(values):
    return float(np.std(values.to_numpy(dtype=np.float64)))


def aggregate_runs(runs, axis_keys):
    """Mean and population std over seeds for every (axes, method) cell."""
    group_keys = list(axis_keys) + ([] if "method" in axis_keys else ["method"])
    aggregate = runs.groupby(group_keys, sort=False).agg(
        runs=("seed", "count"),
        overall_acc_mean=("overall_acc", "mean"),
        overall_acc_std=("overall_acc", _population_std),
        mean_acc_mean=("mean_acc", "mean"),
        mean_acc_std=("mean_acc", _population_std),
    )
    return aggregate.reset_index()


@dataclass
class SweepResult:
    out_dir: Path
    runs: pd.DataFrame
    aggregate: pd.DataFrame
    runs_path: Path
    aggregate_path: Path


def run_sweep(grid_path, out_dir=None, jobs=1):
    grid = load_grid(grid_path)
    out_dir = Path(out_dir or output_root() / "sweeps" / Path(grid_path).stem).resolve()
    out_dir.mkdir(parents=True, exist_ok=True)

    with run_correlation():
        if grid.dataset is not None:
            dataset_path = grid.dataset
        else:
            spec = data_synth.load_spec(grid.spec) if grid.spec else data_synth.default_spec()
            dataset_path, _, _ = generate_dataset(
                spec, grid.dataset_seed, grid.labeled_fraction, out_dir / constants.SWEEP_DATASET_FILENAME
            )
        payloads = sweep_cells(grid, dataset_path, out_dir)
        sweep_logger.info(f"Sweep {grid_path}: {len(payloads)} runs over axes {list(grid.axes) or '-'}")

        rows = dispatch_cells(payloads, jobs=jobs)
        runs = pd.DataFrame(rows)
        aggregate = aggregate_runs(runs, list(grid.axes))

        runs_path = out_dir / constants.SWEEP_RUNS_FILENAME
        aggregate_path = out_dir / constants.SWEEP_AGGREGATE_FILENAME
        runs.to_csv(runs_path, index=False, lineterminator="\n")
        aggregate.to_csv(aggregate_path, index=False, lineterminator="\n")
        sweep_logger.info(f"Sweep wrote {len(runs)} runs and {len(aggregate)} aggregate rows to {out_dir}")

    return SweepResult(out_dir=out_dir, runs=runs, aggregate=aggregate,
                       runs_path=runs_path, aggregate_path=aggregate_path)


# Reports

@dataclass
class RunReport:
    run_dir: Path
    manifest: RunManifest | None
    records: list
    correlation: float | None
    correlation_note: str | None
    balance: tuple
    utilization: list

    @property
    def final(self):
        return self.records[-1]


def _utilization_points(records, points=constants.REPORT_UTILIZATION_POINTS):
    step = max(1, len(records) // points)
    chosen = records[step - 1::step]
    if chosen[-1] is not records[-1]:
        chosen.append(records[-1])
    return [(record.epoch, record.pseudo_label_ratio) for record in chosen]


def build_report(run_dir):
    run_dir = Path(run_dir)
    records = read_metrics(run_dir / constants.METRICS_FILENAME)
    if not records:
        raise DataError(ERROR_RUN_NOT_FOUND, f"{run_dir}: no epochs recorded")
    manifest_path = run_dir / constants.MANIFEST_FILENAME
    manifest = RunManifest.read(run_dir) if manifest_path.is_file() else None

    final = records[-1]
    try:
        correlation, note = confidence_accuracy_correlation(final), None
    except UndefinedResultError as err:
        correlation, note = None, err.detail
    values = np.array([np.nan if v is None else v for v in final.per_class_P], dtype=np.float64)
    return RunReport(
        run_dir=run_dir,
        manifest=manifest,
        records=records,
        correlation=correlation,
        correlation_note=note,
        balance=confidence_balance(ClassConfidence(values)),
        utilization=_utilization_points(records),
    )


def _fmt(value, width=9):
    return f"{'-':>{width}}" if value is None else f"{value:>{width}.4f}"


def format_report(report):
    final = report.final
    lines = [f"run: {report.run_dir}"]
    if report.manifest is not None:
        config = report.manifest.config
        lines.append(f"method: {config['method']}  seed: {config['seed']}  tau: {config['tau']}  "
                     f"mapping: {config['mapping']}")
    lines += [
        f"final epoch: {final.epoch + 1}",
        f"overall_acc: {final.overall_acc:.4f}  mean_acc: {final.mean_class_acc:.4f}",
        "",
        f"{'class':>5} {'acc':>9} {'P_c':>9} {'threshold':>9} {'kept':>7}",
    ]
    for c, acc in enumerate(final.per_class_acc):
        lines.append(f"{c:>5} {_fmt(acc)} {_fmt(final.per_class_P[c])} "
                     f"{_fmt(final.thresholds[c])} {final.pseudo_label_counts[c]:>7}")
    lines.append("")
    if report.correlation is None:
        lines.append(f"confidence/accuracy correlation: undefined ({report.correlation_note})")
    else:
        lines.append(f"confidence/accuracy correlation: {report.correlation:.4f}")
    mean, std = report.balance
    if mean is None:
        lines.append("confidence balance: no class observed")
    else:
        lines.append(f"confidence balance: mean={mean:.4f} std={std:.4f}")
    lines.append("pseudo-label utilization:")
    for epoch, ratio in report.utilization:
        lines.append(f"  epoch {epoch + 1:>4}: {ratio:.4f}")
    return "\n".join(lines) + "\n"
