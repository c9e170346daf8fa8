"""
Correlation ids for CLI work.

Requests used to get their GUID from django_guid's middleware; management
commands and Celery tasks have no request, so each run, generation or sweep
cell sets one explicitly. The `correlation_id` log filter configured in
settings then stamps every record emitted while the id is active.
"""
import uuid
from contextlib import contextmanager

from django_guid import clear_guid, get_guid, set_guid


def new_run_id():
    return uuid.uuid4().hex


@contextmanager
def run_correlation(run_id=None):
    """
    Activate a correlation id for the duration of the block.

    Usage:
        with run_correlation(manifest.run_id):
            trainer.run()
    """
    previous = get_guid()
    run_id = run_id or new_run_id()
    set_guid(run_id)
    try:
        yield run_id
    finally:
        if previous:
            set_guid(previous)
        else:
            clear_guid()
