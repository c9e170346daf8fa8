import json
import logging
import pickle

import numpy as np
from django_guid import get_guid
from django_guid.log_filters import CorrelationId

from apps.common.config_files import IniSettings, format_ini
from apps.common.correlation import run_correlation
from apps.common.errors import (
    ConfigurationError,
    DataError,
    InvalidArgumentError,
    InvariantViolation,
    UndefinedResultError,
    check_in_range,
    parse_positive_int,
)
from apps.common.errors.constants import (
    ERROR_DATASET_NOT_FOUND,
    ERROR_EMPTY_GRID,
    ERROR_NON_FINITE,
    exit_code_for,
)
from apps.common.testutils.tests import TestCaseUtils
from apps.common.utils.number_utils import format_float, to_jsonable


class ErrorsTest(TestCaseUtils):
    def test_exit_codes_follow_the_code_family(self):
        self.assertEqual(ConfigurationError(ERROR_EMPTY_GRID).exit_code, 2)
        self.assertEqual(DataError(ERROR_DATASET_NOT_FOUND).exit_code, 3)
        self.assertEqual(InvariantViolation(ERROR_NON_FINITE).exit_code, 4)
        self.assertEqual(UndefinedResultError().exit_code, 2)
        self.assertEqual(exit_code_for(9999), 4)

    def test_message_defaults_to_code_text(self):
        err = DataError(ERROR_DATASET_NOT_FOUND)

        self.assertEqual(str(err), "[3001] Dataset file not found")

    def test_detail_replaces_message(self):
        self.assertEqual(str(DataError(ERROR_DATASET_NOT_FOUND, "x.csv")), "[3001] x.csv")

    def test_invalid_argument_is_a_value_error(self):
        self.assertIsInstance(InvalidArgumentError(), ValueError)

    def test_pickling_keeps_code_and_detail(self):
        err = pickle.loads(pickle.dumps(ConfigurationError(ERROR_EMPTY_GRID, "no seeds")))

        self.assertIsInstance(err, ConfigurationError)
        self.assertEqual((err.message_code, err.detail), (ERROR_EMPTY_GRID, "no seeds"))

    def test_check_in_range(self):
        self.assertEqual(check_in_range(0.5, 0.0, 1.0), 0.5)
        with self.assertRaisesMessage(InvalidArgumentError, "tau=1.0 outside (0.5, 1.0)"):
            check_in_range(1.0, 0.5, 1.0, "tau", low_inclusive=False, high_inclusive=False)
        with self.assertRaises(ConfigurationError):
            check_in_range(float("nan"), 0.0, 1.0, error_class=ConfigurationError)

    def test_parse_positive_int(self):
        self.assertEqual(parse_positive_int("4"), 4)
        for value in ("0", "-1", "two", None):
            with self.assertRaises(InvalidArgumentError):
                parse_positive_int(value, "jobs")


class IniSettingsTest(TestCaseUtils):
    def test_get_casts_and_defaults(self):
        path = self.tmp_dir / "run.ini"
        path.write_text(format_ini({"tau": "0.9", "epochs": "3"}))

        settings = IniSettings(path, allowed_keys={"tau", "epochs", "mu"})

        self.assertEqual(settings.get("tau", cast=float), 0.9)
        self.assertEqual(settings.get("mu", default=4, cast=int), 4)
        self.assertIn("epochs", settings)
        self.assertEqual(settings.keys(), ["tau", "epochs"])

    def test_format_ini(self):
        self.assertEqual(format_ini({"a": 1, "b": "x"}), "[settings]\na = 1\nb = x\n")

    def test_unparseable_file(self):
        path = self.tmp_dir / "run.ini"
        path.write_text("tau = 0.9\n")

        with self.assertRaises(ConfigurationError):
            IniSettings(path)


class NumberUtilsTest(TestCaseUtils):
    def test_format_float_round_trips(self):
        for value in (0.1 + 0.2, 1e-17, 123456.789, np.float64(2) / 3):
            self.assertEqual(float(format_float(value)), float(value))

    def test_to_jsonable(self):
        data = {"a": np.arange(2), "b": np.float64("nan"), "c": (np.int64(3), np.bool_(True))}

        self.assertEqual(json.dumps(to_jsonable(data)), '{"a": [0, 1], "b": null, "c": [3, true]}')


class RunCorrelationTest(TestCaseUtils):
    def test_id_is_active_inside_the_block_only(self):
        with run_correlation("abc123") as run_id:
            self.assertEqual(run_id, "abc123")
            self.assertEqual(get_guid(), "abc123")

        self.assertNotEqual(get_guid(), "abc123")

    def test_nested_blocks_restore_the_outer_id(self):
        with run_correlation("outer"):
            with run_correlation() as inner:
                self.assertEqual(get_guid(), inner)

            self.assertEqual(get_guid(), "outer")

    def test_log_filter_stamps_the_id(self):
        record = logging.LogRecord("semisup.trainer", logging.INFO, __file__, 1, "hello", None, None)

        with run_correlation("feedbeef"):
            CorrelationId().filter(record)

        self.assertEqual(record.correlation_id, "feedbeef")
