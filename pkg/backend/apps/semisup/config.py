"""
Trainer configuration files.

A trainer config is an INI file with one `[settings]` section whose keys
are exactly the TrainerConfig fields; omitted keys take the defaults that
`manage.py train --print-config` prints.
"""
from dataclasses import fields, replace

from decouple import strtobool

from apps.common.config_files import IniSettings, format_ini
from apps.common.errors import ConfigurationError
from apps.common.errors.constants import ERROR_INVALID_CONFIG_VALUE, ERROR_UNKNOWN_CONFIG_KEY
from apps.common.utils.number_utils import format_float

from .trainer import TrainerConfig


TRAINER_KEYS = tuple(f.name for f in fields(TrainerConfig))

_INT_KEYS = {"seed", "batch_size", "mu", "epochs", "resample_period", "hidden"}
_BOOL_KEYS = {"resample_labeled", "resample_unlabeled"}
_STR_KEYS = {"method", "mapping"}


def cast_for(key):
    if key in _INT_KEYS:
        return int
    if key in _BOOL_KEYS:
        return bool
    if key in _STR_KEYS:
        return str
    return float


def parse_value(key, raw):
    """Cast one raw string the way the INI reader would."""
    if key not in TRAINER_KEYS:
        raise ConfigurationError(ERROR_UNKNOWN_CONFIG_KEY, f"unknown key '{key}'")
    cast = cast_for(key)
    text = str(raw).strip()
    try:
        if cast is bool:
            # Same truth table as decouple uses for INI values; empty means false.
            return bool(strtobool(text)) if text else False
        return cast(text)
    except ValueError as err:
        raise ConfigurationError(ERROR_INVALID_CONFIG_VALUE, f"invalid value for '{key}': {raw!r}") from err


def config_from_values(values, base=None):
    """TrainerConfig from a mapping of key -> raw string or typed value."""
    base = base or TrainerConfig()
    typed = {key: parse_value(key, value) if isinstance(value, str) else value
             for key, value in values.items()}
    return replace(base, **typed).validate()


def load_trainer_config(path=None):
    if path is None:
        return TrainerConfig().validate()
    settings = IniSettings(path, allowed_keys=TRAINER_KEYS)
    values = {}
    for key in TRAINER_KEYS:
        value = settings.get(key, default=None, cast=cast_for(key))
        if value is not None:
            values[key] = value
    return config_from_values(values)


def apply_overrides(config, overrides):
    """Replace the fields whose override is not None (command-line flags)."""
    values = {key: value for key, value in overrides.items() if value is not None}
    if not values:
        return config
    return config_from_values(values, base=config)


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "value"):
        return value.value
    return str(value)


def dump_trainer_config(config):
    """Every key with its value, in field order, as an INI document."""
    return format_ini({key: format_value(getattr(config, key)) for key in TRAINER_KEYS})
