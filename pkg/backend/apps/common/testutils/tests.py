import shutil
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase


class TestCaseUtils(SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.tmp_dir = Path(tempfile.mkdtemp(prefix="semisup-test-"))
        self.addCleanup(shutil.rmtree, self.tmp_dir, ignore_errors=True)

    def rng(self, seed=0):
        """Seeded generator, convenience to avoid importing numpy in every test"""
        return np.random.default_rng(seed)

    def assertAllClose(self, actual, expected, rtol=1e-12, atol=1e-12):
        """Arrays are element-wise equal within tolerance"""
        np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)

    def assertArrayEqual(self, actual, expected):
        """Arrays are exactly equal, shape included"""
        np.testing.assert_array_equal(actual, expected)

    def assertIsDistribution(self, probs, atol=1e-9):
        """Every row is a probability vector"""
        probs = np.atleast_2d(probs)
        self.assertTrue(np.all(probs >= 0.0))
        self.assertTrue(np.all(probs <= 1.0))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=atol)

    def assertFilesIdentical(self, first, second):
        """Two files have byte-identical contents"""
        self.assertEqual(Path(first).read_bytes(), Path(second).read_bytes())
