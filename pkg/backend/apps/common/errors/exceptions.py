from .constants import (
    ERROR_CONFIGURATION,
    ERROR_DATA,
    ERROR_INVALID_ARGUMENT,
    ERROR_INVARIANT,
    ERROR_UNDEFINED_CORRELATION,
    exit_code_for,
    get_message,
)


class SemiSupError(Exception):
    """
    Base error carrying a numbered message code.

    The code decides the process exit code of the management commands
    (see constants.exit_code_for).
    """
    default_code = ERROR_CONFIGURATION

    def __init__(self, message_code=None, detail=None, errors=None):
        self.message_code = message_code or self.default_code
        self.errors = errors
        self.detail = detail or get_message(self.message_code)
        super().__init__(self.detail)

    @property
    def exit_code(self):
        return exit_code_for(self.message_code)

    def __str__(self):
        return f"[{self.message_code}] {self.detail}"

    def __reduce__(self):
        # keeps the code when a worker process sends the error back
        return self.__class__, (self.message_code, self.detail, self.errors)


class ConfigurationError(SemiSupError):
    default_code = ERROR_CONFIGURATION


class InvalidArgumentError(SemiSupError, ValueError):
    default_code = ERROR_INVALID_ARGUMENT


class UndefinedResultError(InvalidArgumentError):
    """A statistic has no defined value for the given inputs."""
    default_code = ERROR_UNDEFINED_CORRELATION


class DataError(SemiSupError):
    default_code = ERROR_DATA


class InvariantViolation(SemiSupError):
    default_code = ERROR_INVARIANT
