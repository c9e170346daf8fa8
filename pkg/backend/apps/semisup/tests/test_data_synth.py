import numpy as np

from apps.common.errors import ConfigurationError, DataError
from apps.common.testutils.tests import TestCaseUtils

from ..data_synth import (
    AugmentConfig,
    DatasetSpec,
    Population,
    default_spec,
    dump_spec,
    generate,
    load_spec,
    nearest_mean_accuracy,
    orthogonal_means,
    read_dataset_csv,
    split,
    split_sizes,
    strong_augment,
    weak_augment,
    write_dataset_csv,
)


def small_spec(counts=(3, 2), d_in=2, scale=1.0):
    return DatasetSpec(
        class_counts=tuple(counts),
        class_means=orthogonal_means(len(counts), d_in, 3.0),
        class_scales=(scale,) * len(counts),
        d_in=d_in,
    )


class GenerateTest(TestCaseUtils):
    def test_counts_are_respected(self):
        population = generate(small_spec(), seed=0)

        self.assertEqual(population.features.shape, (5, 2))
        self.assertArrayEqual(population.labels, [0, 0, 0, 1, 1])

    def test_same_seed_same_population(self):
        first = generate(default_spec(), seed=3)
        second = generate(default_spec(), seed=3)

        self.assertArrayEqual(first.features, second.features)
        self.assertArrayEqual(first.labels, second.labels)

    def test_tight_classes_are_separable_by_nearest_mean(self):
        spec = small_spec(counts=(200, 150, 100), d_in=4, scale=0.1)

        accuracy = nearest_mean_accuracy(generate(spec, seed=1), spec)

        self.assertGreater(accuracy, 0.99)

    def test_default_spec(self):
        spec = default_spec()

        self.assertEqual(spec.num_classes, 8)
        self.assertEqual(sum(spec.class_counts), 1275)
        self.assertEqual(spec.class_means.shape, (8, 16))
        self.assertGreater(max(spec.class_scales), min(spec.class_scales))

    def test_invalid_spec_names_the_field(self):
        with self.assertRaisesMessage(ConfigurationError, "class_counts"):
            generate(small_spec(counts=(5,)), seed=0)
        with self.assertRaisesMessage(ConfigurationError, "class_scales"):
            generate(small_spec(scale=0.0), seed=0)


class SpecFileTest(TestCaseUtils):
    def test_dumped_spec_loads_back(self):
        path = self.tmp_dir / "spec.ini"
        path.write_text(dump_spec(default_spec()))

        spec = load_spec(path)

        self.assertEqual(spec.class_counts, default_spec().class_counts)
        self.assertArrayEqual(spec.class_means, default_spec().class_means)

    def test_mean_radius_gives_orthogonal_means(self):
        path = self.tmp_dir / "spec.ini"
        path.write_text("[settings]\nclass_counts = 10,8,6\nclass_scales = 1,1,2\nd_in = 4\nmean_radius = 2.5\n")

        spec = load_spec(path)

        self.assertArrayEqual(spec.class_means, orthogonal_means(3, 4, 2.5))
        self.assertEqual(spec.class_scales, (1.0, 1.0, 2.0))

    def test_missing_key_is_named(self):
        path = self.tmp_dir / "spec.ini"
        path.write_text("[settings]\nclass_counts = 10,8\nd_in = 4\n")

        with self.assertRaisesMessage(ConfigurationError, "class_scales"):
            load_spec(path)

    def test_unknown_key_is_named(self):
        path = self.tmp_dir / "spec.ini"
        path.write_text("[settings]\nclass_counts = 10,8\nclass_scales = 1,1\nd_in = 4\ncolour = red\n")

        with self.assertRaisesMessage(ConfigurationError, "colour"):
            load_spec(path)


class SplitTest(TestCaseUtils):
    def test_split_sizes(self):
        self.assertEqual(split_sizes(100, 0.1), (10, 20, 70))
        self.assertEqual(split_sizes(4, 0.5), (2, 1, 1))
        self.assertEqual(split_sizes(70, 0.1), (7, 14, 49))

    def test_splits_are_disjoint_exhaustive_and_stratified(self):
        population = generate(default_spec(), seed=0)

        splits = split(population, 0.1, seed=0)

        labeled, unlabeled, test = (set(s.ids.tolist()) for s in (splits.labeled, splits.unlabeled, splits.test))
        self.assertFalse(labeled & unlabeled or labeled & test or unlabeled & test)
        self.assertEqual(labeled | unlabeled | test, set(range(1275)))
        for c in range(8):
            self.assertIn(c, splits.labeled.labels)
            self.assertIn(c, splits.test.labels)

    def test_per_class_sizes(self):
        population = generate(small_spec(counts=(100, 4), d_in=2), seed=0)

        splits = split(population, 0.1, seed=0)

        self.assertEqual(int(np.sum(splits.labeled.labels == 0)), 10)
        self.assertEqual(int(np.sum(splits.test.labels == 0)), 20)
        self.assertEqual(int(np.sum(splits.unlabeled.diagnostic_labels() == 0)), 70)

    def test_same_seed_same_split(self):
        population = generate(default_spec(), seed=0)

        self.assertArrayEqual(split(population, 0.1, 5).labeled.ids, split(population, 0.1, 5).labeled.ids)

    def test_class_too_small(self):
        population = generate(small_spec(counts=(10, 2)), seed=0)

        with self.assertRaises(ConfigurationError):
            split(population, 0.6, seed=0)

    def test_fraction_must_lie_in_open_interval(self):
        population = generate(small_spec(), seed=0)

        with self.assertRaises(ConfigurationError):
            split(population, 1.0, seed=0)


class AugmentTest(TestCaseUtils):
    def test_zero_weak_noise_is_identity(self):
        x = np.array([[1.0, -2.0, 3.0]])

        self.assertArrayEqual(weak_augment(x, AugmentConfig(weak_sigma=0.0), self.rng(0)), x)

    def test_degenerate_strong_config_is_identity(self):
        x = np.array([[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]])
        cfg = AugmentConfig(weak_sigma=0.0, strong_sigma=0.0, strong_scale_range=(1.0, 1.0))

        self.assertArrayEqual(strong_augment(x, cfg, self.rng(0)), x)

    def test_weak_noise_has_configured_std(self):
        samples = weak_augment(np.zeros((100_000, 3)), AugmentConfig(weak_sigma=0.1), self.rng(1))

        for std in samples.std(axis=0):
            self.assertAlmostEqual(std, 0.1, delta=0.002)

    def test_augmentations_keep_shape_and_input(self):
        x = self.rng(2).normal(size=(5, 4))
        original = x.copy()
        cfg = AugmentConfig()

        self.assertEqual(weak_augment(x, cfg, self.rng(3)).shape, x.shape)
        self.assertEqual(strong_augment(x, cfg, self.rng(3)).shape, x.shape)
        self.assertEqual(strong_augment(x[0], cfg, self.rng(3)).shape, (4,))
        self.assertArrayEqual(x, original)

    def test_invalid_config(self):
        with self.assertRaises(ConfigurationError):
            AugmentConfig(weak_sigma=0.5, strong_sigma=0.2).validate()
        with self.assertRaises(ConfigurationError):
            AugmentConfig(strong_scale_range=(1.1, 1.2)).validate()


class DatasetCsvTest(TestCaseUtils):
    def test_layout(self):
        population = generate(small_spec(), seed=0)
        splits = split(population, 0.5, seed=0)
        path = self.tmp_dir / "data.csv"

        write_dataset_csv(population, splits, path)

        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "id,label,split,f0,f1")
        self.assertEqual(len(lines), 6)
        first = lines[1].split(",")
        self.assertEqual(first[:2], ["0", "0"])
        self.assertEqual(float(first[3]), population.features[0, 0])

    def test_written_dataset_reads_back_exactly(self):
        population = generate(default_spec(), seed=2)
        splits = split(population, 0.1, seed=2)
        path = self.tmp_dir / "data.csv"
        write_dataset_csv(population, splits, path)

        read_population, read_splits = read_dataset_csv(path)

        self.assertArrayEqual(read_population.features, population.features)
        self.assertArrayEqual(read_splits.unlabeled.ids, splits.unlabeled.ids)
        self.assertArrayEqual(read_splits.test.labels, splits.test.labels)

    def test_same_seed_same_bytes(self):
        for name in ("a.csv", "b.csv"):
            population = generate(default_spec(), seed=4)
            write_dataset_csv(population, split(population, 0.1, seed=4), self.tmp_dir / name)

        self.assertFilesIdentical(self.tmp_dir / "a.csv", self.tmp_dir / "b.csv")

    def test_missing_file(self):
        with self.assertRaises(DataError):
            read_dataset_csv(self.tmp_dir / "nope.csv")

    def test_malformed_rows(self):
        path = self.tmp_dir / "bad.csv"
        path.write_text("id,label,split,f0\n0,0,labeled,1.0\n1,1,holdout,2.0\n")

        with self.assertRaisesMessage(DataError, "unknown split"):
            read_dataset_csv(path)

    def test_split_missing_a_class(self):
        path = self.tmp_dir / "bad.csv"
        path.write_text("id,label,split,f0\n0,0,labeled,1.0\n1,1,test,2.0\n2,0,test,0.5\n")

        with self.assertRaisesMessage(DataError, "labeled split"):
            read_dataset_csv(path)

    def test_population_exposes_class_count(self):
        self.assertEqual(Population(np.zeros((3, 1)), np.array([0, 2, 1])).num_classes, 3)
