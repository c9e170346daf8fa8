import math

from .constants import ERROR_INVALID_ARGUMENT, ERROR_OUT_OF_RANGE
from .exceptions import InvalidArgumentError


def check_condition(condition, message_code=ERROR_INVALID_ARGUMENT, detail=None,
                    error_class=InvalidArgumentError):
    """
    Check condition or raise error.

    Usage:
        check_condition(len(batch) > 0, ERROR_EMPTY_BATCH)
        check_condition(path.exists(), ERROR_DATASET_NOT_FOUND, str(path), DataError)
    """
    if not condition:
        raise error_class(message_code, detail)


def check_in_range(value, low, high, field_name="value", *, low_inclusive=True,
                   high_inclusive=True, error_class=InvalidArgumentError):
    """Raise when value is NaN or falls outside the given interval."""
    above = value >= low if low_inclusive else value > low
    below = value <= high if high_inclusive else value < high
    if math.isnan(value) or not (above and below):
        left = "[" if low_inclusive else "("
        right = "]" if high_inclusive else ")"
        raise error_class(
            ERROR_OUT_OF_RANGE, f"{field_name}={value!r} outside {left}{low}, {high}{right}"
        )
    return value


def parse_positive_int(value, field_name="value", error_class=InvalidArgumentError):
    """Safely parse a positive integer or raise with ERROR_OUT_OF_RANGE.

    Args:
        value: The incoming value to parse
        field_name: Name used in the error message

    Returns:
        int: Parsed positive integer
    """
    try:
        parsed = int(value)
        if parsed <= 0:
            raise ValueError
        return parsed
    except (ValueError, TypeError) as err:
        raise error_class(ERROR_OUT_OF_RANGE, f"Invalid {field_name}: {value!r}") from err
