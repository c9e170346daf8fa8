from .exceptions import (
    ConfigurationError,
    DataError,
    InvalidArgumentError,
    InvariantViolation,
    SemiSupError,
    UndefinedResultError,
)
from .helpers import check_condition, check_in_range, parse_positive_int


__all__ = [
    "ConfigurationError",
    "DataError",
    "InvalidArgumentError",
    "InvariantViolation",
    "SemiSupError",
    "UndefinedResultError",
    "check_condition",
    "check_in_range",
    "parse_positive_int",
]
