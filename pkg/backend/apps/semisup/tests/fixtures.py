"""Small datasets and configs that train in well under a second."""
from ..data_synth import DatasetSpec, generate, orthogonal_means, split, write_dataset_csv
from ..trainer import TrainerConfig


def tiny_spec():
    return DatasetSpec(
        class_counts=(60, 40, 30),
        class_means=orthogonal_means(3, 4, 2.0),
        class_scales=(1.0, 1.0, 1.4),
        d_in=4,
    ).validate()


def tiny_population(seed=0):
    return generate(tiny_spec(), seed)


def tiny_splits(seed=0, labeled_fraction=0.2):
    return split(tiny_population(seed), labeled_fraction, seed)


def tiny_config(**overrides):
    values = {
        "method": "confidmatch",
        "seed": 0,
        "epochs": 4,
        "batch_size": 8,
        "mu": 2,
        "hidden": 8,
        "resample_period": 2,
        "lr_max": 0.05,
        "lr_min": 0.001,
    }
    values.update(overrides)
    return TrainerConfig(**values).validate()


def write_tiny_dataset(path, seed=0, labeled_fraction=0.2):
    population = tiny_population(seed)
    return write_dataset_csv(population, split(population, labeled_fraction, seed), path)
