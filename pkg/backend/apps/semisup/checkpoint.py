"""
Self-describing JSON checkpoints.

Floats are written with their shortest round-trip repr and the generator
state is stored verbatim, so a restored trainer continues bit-identically.
"""
import json
import logging
import os
from pathlib import Path

from apps.common.errors import DataError
from apps.common.errors.constants import ERROR_CHECKPOINT_NOT_FOUND, ERROR_MALFORMED_CHECKPOINT

from .constants import CHECKPOINT_FORMAT, CHECKPOINT_VERSION
from .trainer import SemiSupervisedTrainer


logger = logging.getLogger("semisup.services")

REQUIRED_STATE_KEYS = (
    "config", "epoch", "params", "initial_params", "velocity", "thresholds", "stats",
    "labeled_pool", "unlabeled_pool", "rng_state", "records",
)


def save_checkpoint(trainer, path, dataset_sha256=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dataset_sha256": dataset_sha256,
        "state": trainer.state_dict(),
    }
    tmp_path = path.with_name(path.name + ".tmp")
    tmp_path.write_text(json.dumps(payload, allow_nan=False), encoding="utf-8")
    os.replace(tmp_path, path)
    logger.info(f"Checkpoint at epoch {trainer.epoch} written to {path}")
    return path


def load_checkpoint(path):
    """Parsed checkpoint payload; raises DataError when missing or malformed."""
    path = Path(path)
    if not path.is_file():
        raise DataError(ERROR_CHECKPOINT_NOT_FOUND, f"{path} does not exist")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise DataError(ERROR_MALFORMED_CHECKPOINT, f"{path}: {err}") from err
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(ERROR_MALFORMED_CHECKPOINT, f"{path}: not a checkpoint file")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataError(ERROR_MALFORMED_CHECKPOINT, f"{path}: unsupported version {payload.get('version')!r}")
    state = payload.get("state")
    missing = [key for key in REQUIRED_STATE_KEYS if not isinstance(state, dict) or key not in state]
    if missing:
        raise DataError(ERROR_MALFORMED_CHECKPOINT, f"{path}: missing '{missing[0]}'")
    return payload


def restore_trainer(payload, splits):
    try:
        return SemiSupervisedTrainer.from_state_dict(payload["state"], splits)
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(ERROR_MALFORMED_CHECKPOINT, f"cannot restore trainer: {err}") from err
