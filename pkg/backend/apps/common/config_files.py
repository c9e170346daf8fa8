"""
INI run-configuration files read through python-decouple.

Every file has one `[settings]` section of `key = value` lines. As with any
decouple config, an environment variable with the exact key name overrides
the file value.
"""
import os
from configparser import Error as ConfigParserError
from pathlib import Path

from decouple import Config, RepositoryIni, UndefinedValueError

from apps.common.errors import ConfigurationError
from apps.common.errors.constants import (
    ERROR_CONFIG_FILE_NOT_FOUND,
    ERROR_INVALID_CONFIG_VALUE,
    ERROR_UNKNOWN_CONFIG_KEY,
)


SECTION = RepositoryIni.SECTION


class IniSettings:
    """
    Validated view over one INI file.

    Usage:
        settings = IniSettings(path, allowed_keys={"tau", "epochs"})
        tau = settings.get("tau", default=0.8, cast=float)
    """

    def __init__(self, path, allowed_keys=None):
        self.path = Path(path)
        if not self.path.is_file():
            raise ConfigurationError(ERROR_CONFIG_FILE_NOT_FOUND, f"{self.path} does not exist")
        try:
            self.repository = RepositoryIni(str(self.path))
        except (ConfigParserError, UnicodeDecodeError) as err:
            raise ConfigurationError(ERROR_INVALID_CONFIG_VALUE, f"{self.path}: {err}") from err
        if not self.repository.parser.has_section(SECTION):
            raise ConfigurationError(
                ERROR_INVALID_CONFIG_VALUE, f"{self.path}: missing [{SECTION}] section"
            )
        self.config = Config(self.repository)
        if allowed_keys is not None:
            unknown = sorted(set(self.keys()) - set(allowed_keys))
            if unknown:
                raise ConfigurationError(
                    ERROR_UNKNOWN_CONFIG_KEY, f"{self.path}: unknown key '{unknown[0]}'"
                )

    def keys(self):
        return list(self.repository.parser.options(SECTION))

    def __contains__(self, key):
        return self.repository.parser.has_option(SECTION, key)

    def raw(self, key):
        return self.repository.parser.get(SECTION, key)

    def get(self, key, default=None, cast=None):
        """Cast value of key, or default when absent; a failing cast names the key."""
        if key not in self and key not in os.environ:
            return default
        try:
            if cast is None:
                return self.config(key)
            return self.config(key, cast=cast)
        except (ValueError, TypeError, UndefinedValueError) as err:
            raw = self.raw(key) if key in self else None
            raise ConfigurationError(
                ERROR_INVALID_CONFIG_VALUE, f"{self.path}: invalid value for '{key}': {raw!r}"
            ) from err


def format_ini(values):
    """Render an ordered mapping as a `[settings]` INI document."""
    lines = [f"[{SECTION}]"]
    for key, value in values.items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
