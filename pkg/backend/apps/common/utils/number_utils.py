"""
Number utilities for writing floats to text artifacts.

Floats go to CSV and JSON as the shortest decimal that round-trips, so a
reader recovers the exact binary value and reruns produce identical bytes.
"""
import math

import numpy as np


def format_float(value):
    """Shortest round-trip decimal for a float (repr semantics)."""
    return repr(float(value))


def to_jsonable(data):
    """
    Recursively convert numpy containers and scalars to plain Python values.

    NaN becomes None so the output is strict JSON.

    Args:
        data: dict, list, tuple, numpy array or scalar

    Returns:
        Same structure built from dict/list/float/int/bool/None
    """
    if isinstance(data, dict):
        return {key: to_jsonable(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_jsonable(item) for item in data]
    if isinstance(data, np.ndarray):
        return to_jsonable(data.tolist())
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        value = float(data)
        return None if math.isnan(value) else value
    return data
