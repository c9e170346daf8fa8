import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from apps.common.errors import InvalidArgumentError
from apps.common.testutils.tests import TestCaseUtils

from ..pseudo_label import (
    ClassConfidence,
    ClassConfidenceStats,
    MappingKind,
    assign_class,
    class_confidence,
    confidence_balance,
    dynamic_threshold,
    fixed_thresholds,
    map_learning_status,
    pseudo_label_mask,
    update_stats,
)


def brute_force_stats(batch, num_classes):
    sum_conf = [0.0] * num_classes
    count = [0] * num_classes
    for probs in batch:
        best = 0
        for c in range(1, num_classes):
            if probs[c] > probs[best]:
                best = c
        sum_conf[best] += probs[best]
        count[best] += 1
    return sum_conf, count


def closed_form_threshold(p, tau, kind):
    if kind == "concave":
        mapped = p / (2 - p)
    elif kind == "linear":
        mapped = p
    else:
        mapped = math.exp(-5 * (1 - p) ** 2)
    if mapped < 1 - tau:
        return 1 - tau
    if mapped > tau:
        return tau
    return mapped


class AssignClassTest(TestCaseUtils):
    def test_unique_max(self):
        self.assertEqual(assign_class([0.2, 0.5, 0.3]), 1)

    def test_ties_go_to_lowest_index(self):
        self.assertEqual(assign_class([0.4, 0.4, 0.2]), 0)
        self.assertEqual(assign_class([0.25, 0.25, 0.25, 0.25]), 0)

    def test_batch(self):
        self.assertArrayEqual(assign_class([[0.2, 0.8], [0.6, 0.4]]), [1, 0])


class UpdateStatsTest(TestCaseUtils):
    def test_empty_batch_leaves_stats_unchanged(self):
        stats = ClassConfidenceStats(np.array([1.7, 0.7]), np.array([2, 1]))

        updated = update_stats(stats, np.zeros((0, 2)))

        self.assertArrayEqual(updated.sum_conf, [1.7, 0.7])
        self.assertArrayEqual(updated.count, [2, 1])

    def test_direct_accumulation(self):
        stats = update_stats(ClassConfidenceStats.fresh(2), [[0.9, 0.1], [0.8, 0.2], [0.3, 0.7]])

        self.assertArrayEqual(stats.count, [2, 1])
        self.assertAlmostEqual(stats.sum_conf[0], 1.7, places=15)
        self.assertAlmostEqual(stats.sum_conf[1], 0.7, places=15)

    def test_input_stats_are_not_modified(self):
        fresh = ClassConfidenceStats.fresh(2)

        update_stats(fresh, [[0.9, 0.1]])

        self.assertArrayEqual(fresh.count, [0, 0])

    def test_matches_group_by_oracle_exactly(self):
        rng = self.rng(0)
        for _ in range(1000):
            num_classes = int(rng.integers(2, 6))
            batch = rng.dirichlet(np.ones(num_classes), size=int(rng.integers(1, 40)))

            stats = update_stats(ClassConfidenceStats.fresh(num_classes), batch)

            sum_conf, count = brute_force_stats(batch.tolist(), num_classes)
            self.assertEqual(stats.sum_conf.tolist(), sum_conf)
            self.assertEqual(stats.count.tolist(), count)

    def test_updates_compose(self):
        rng = self.rng(1)
        first, second = rng.dirichlet(np.ones(4), size=30), rng.dirichlet(np.ones(4), size=25)
        fresh = ClassConfidenceStats.fresh(4)

        stepwise = update_stats(update_stats(fresh, first), second)
        at_once = update_stats(fresh, np.vstack([first, second]))

        self.assertArrayEqual(stepwise.sum_conf, at_once.sum_conf)
        self.assertArrayEqual(stepwise.count, at_once.count)

    def test_order_of_batch_does_not_matter(self):
        rng = self.rng(2)
        batch = rng.dirichlet(np.ones(4), size=50)

        forward_order = update_stats(ClassConfidenceStats.fresh(4), batch)
        shuffled = update_stats(ClassConfidenceStats.fresh(4), rng.permutation(batch))

        self.assertAllClose(forward_order.sum_conf, shuffled.sum_conf)
        self.assertArrayEqual(forward_order.count, shuffled.count)

    def test_shard_merge_equals_single_pass(self):
        rng = self.rng(3)
        batch = rng.dirichlet(np.ones(3), size=40)
        fresh = ClassConfidenceStats.fresh(3)

        merged = update_stats(fresh, batch[:15]).merge(update_stats(fresh, batch[15:]))
        single = update_stats(fresh, batch)

        self.assertAllClose(merged.sum_conf, single.sum_conf)
        self.assertArrayEqual(merged.count, single.count)

    def test_class_count_mismatch_is_invalid(self):
        with self.assertRaises(InvalidArgumentError):
            update_stats(ClassConfidenceStats.fresh(3), [[0.5, 0.5]])


class ClassConfidenceTest(TestCaseUtils):
    def test_division(self):
        conf = class_confidence(ClassConfidenceStats(np.array([1.7, 0.7]), np.array([2, 1])))

        self.assertAlmostEqual(conf.values[0], 0.85, places=15)
        self.assertAlmostEqual(conf.values[1], 0.7, places=15)

    def test_empty_classes_are_unobserved(self):
        conf = class_confidence(ClassConfidenceStats.fresh(3))

        self.assertFalse(conf.observed.any())
        self.assertEqual(conf.as_list(), [None, None, None])

    def test_matches_mean_of_max_probabilities(self):
        rng = self.rng(4)
        for _ in range(200):
            num_classes = int(rng.integers(2, 6))
            batch = rng.dirichlet(np.ones(num_classes), size=int(rng.integers(1, 30)))

            conf = class_confidence(update_stats(ClassConfidenceStats.fresh(num_classes), batch))

            sum_conf, count = brute_force_stats(batch.tolist(), num_classes)
            for c in range(num_classes):
                if count[c]:
                    self.assertEqual(conf.values[c], sum_conf[c] / count[c])
                    self.assertGreaterEqual(conf.values[c], 1 / num_classes - 1e-12)
                else:
                    self.assertTrue(math.isnan(conf.values[c]))

    def test_balance_over_observed_classes(self):
        conf = ClassConfidence(np.array([0.9, np.nan, 0.7]))

        mean, std = confidence_balance(conf)

        self.assertAlmostEqual(mean, 0.8, places=12)
        self.assertAlmostEqual(std, 0.1, places=12)
        self.assertEqual(confidence_balance(ClassConfidence(np.array([np.nan]))), (None, None))


class MapLearningStatusTest(TestCaseUtils):
    def test_worked_values(self):
        self.assertEqual(map_learning_status(1.0, MappingKind.CONCAVE), 1.0)
        self.assertAlmostEqual(map_learning_status(0.8, MappingKind.CONCAVE), 0.8 / 1.2, places=15)
        self.assertAlmostEqual(map_learning_status(0.0, MappingKind.EXPONENTIAL), 0.006737946999085467,
                               places=15)
        self.assertEqual(map_learning_status(0.42, MappingKind.LINEAR), 0.42)

    def test_out_of_range_is_invalid(self):
        for value in (-0.01, 1.01, float("nan")):
            with self.assertRaises(InvalidArgumentError):
                map_learning_status(value, MappingKind.CONCAVE)

    def test_parse_accepts_names_and_alias(self):
        self.assertIs(MappingKind.parse("Concave"), MappingKind.CONCAVE)
        self.assertIs(MappingKind.parse("exp"), MappingKind.EXPONENTIAL)
        with self.assertRaises(InvalidArgumentError):
            MappingKind.parse("cubic")

    @settings(max_examples=300, deadline=None)
    @given(
        low=st.floats(min_value=0.0, max_value=1.0),
        high=st.floats(min_value=0.0, max_value=1.0),
        kind=st.sampled_from(list(MappingKind)),
    )
    def test_mappings_are_monotone_into_unit_interval(self, low, high, kind):
        low, high = min(low, high), max(low, high)

        mapped_low = map_learning_status(low, kind)
        mapped_high = map_learning_status(high, kind)

        self.assertTrue(0.0 <= mapped_low <= mapped_high <= 1.0)

    @settings(max_examples=300, deadline=None)
    @given(x=st.floats(min_value=0.0, max_value=1.0))
    def test_concave_never_exceeds_its_input(self, x):
        self.assertLessEqual(map_learning_status(x, MappingKind.CONCAVE), x)


class DynamicThresholdTest(TestCaseUtils):
    def threshold(self, p, tau=0.8, kind=MappingKind.CONCAVE):
        return dynamic_threshold(ClassConfidence(np.array([p])), tau, kind)[0]

    def test_lower_clamp(self):
        self.assertAlmostEqual(self.threshold(0.3), 0.2, places=6)

    def test_upper_clamp(self):
        self.assertAlmostEqual(self.threshold(0.95), 0.8, places=6)

    def test_interior(self):
        self.assertAlmostEqual(self.threshold(0.6), 0.42857, places=5)

    def test_unobserved_class_gets_upper_limit(self):
        thresholds = dynamic_threshold(ClassConfidence(np.array([0.6, np.nan])), 0.8, MappingKind.CONCAVE)

        self.assertEqual(thresholds[1], 0.8)

    def test_tau_must_lie_in_open_interval(self):
        for tau in (0.5, 1.0, 0.3):
            with self.assertRaises(InvalidArgumentError):
                dynamic_threshold(ClassConfidence(np.array([0.6])), tau, MappingKind.CONCAVE)

    def test_fixed_thresholds(self):
        self.assertArrayEqual(fixed_thresholds(3, 0.9), [0.9, 0.9, 0.9])

    def test_law_on_random_triples(self):
        rng = self.rng(5)
        kinds = list(MappingKind)
        for _ in range(10_000):
            p = float(rng.uniform(0.0, 1.0))
            tau = float(rng.uniform(0.5001, 0.9999))
            kind = kinds[int(rng.integers(0, 3))]

            value = self.threshold(p, tau, kind)

            self.assertGreaterEqual(value, 1 - tau)
            self.assertLessEqual(value, tau)
            self.assertAlmostEqual(value, closed_form_threshold(p, tau, kind.value), places=12)

    @settings(max_examples=300, deadline=None)
    @given(
        low=st.floats(min_value=0.0, max_value=1.0),
        high=st.floats(min_value=0.0, max_value=1.0),
        tau=st.floats(min_value=0.51, max_value=0.99),
        kind=st.sampled_from(list(MappingKind)),
    )
    def test_monotone_in_class_confidence(self, low, high, tau, kind):
        low, high = min(low, high), max(low, high)

        self.assertLessEqual(self.threshold(low, tau, kind), self.threshold(high, tau, kind))


class PseudoLabelMaskTest(TestCaseUtils):
    def test_above_and_at_threshold_are_kept(self):
        mask = pseudo_label_mask([[0.85, 0.15], [0.8, 0.2], [0.79, 0.21]], [0.8, 0.8])

        self.assertArrayEqual(mask.keep, [True, True, False])
        self.assertArrayEqual(mask.labels, [0, 0, 0])
        self.assertEqual(mask.used_count, 2)

    def test_matches_elementwise_oracle(self):
        rng = self.rng(6)
        for _ in range(1000):
            probs = rng.dirichlet(np.ones(4), size=20)
            thresholds = rng.uniform(0.2, 0.8, size=4)

            mask = pseudo_label_mask(probs, thresholds)

            for i, row in enumerate(probs.tolist()):
                label = row.index(max(row))
                self.assertEqual(mask.labels[i], label)
                self.assertEqual(bool(mask.keep[i]), max(row) >= thresholds[label])

    def test_kept_per_class(self):
        mask = pseudo_label_mask([[0.9, 0.1], [0.2, 0.8], [0.95, 0.05], [0.6, 0.4]], [0.8, 0.8])

        self.assertArrayEqual(mask.kept_per_class(2), [2, 1])

    @settings(max_examples=200, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        bump=st.floats(min_value=0.0, max_value=0.5),
    )
    def test_raising_thresholds_never_turns_keep_on(self, seed, bump):
        rng = np.random.default_rng(seed)
        probs = rng.dirichlet(np.ones(3), size=16)
        thresholds = rng.uniform(0.2, 0.8, size=3)

        before = pseudo_label_mask(probs, thresholds).keep
        after = pseudo_label_mask(probs, thresholds + bump).keep

        self.assertFalse(np.any(after & ~before))
