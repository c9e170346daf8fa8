from celery import shared_task

from .services import execute_cell


@shared_task
def run_sweep_cell(payload):
    """
    Train one sweep cell and return its runs.csv row.

    Usage:
        run_sweep_cell.delay({
            "index": 0,
            "axes": {"tau": "0.75"},
            "seed": 0,
            "values": {"tau": "0.75", "seed": "0"},
            "dataset_path": "/abs/dataset.csv",
            "run_dir": "/abs/sweep/cells/cell-0000",
        })
    """
    return execute_cell(payload)
