import numpy as np
import pytest

from fairforge.data import DatasetSchema, load_dataset
from fairforge.datagen import generate, schema_dict
from fairforge.training import prepare_fairness

# Frozen seeds for every test that trains on generated data. Changing any of
# these invalidates the calibrated expectations in test_acceptance.py.
GEN_SEED = 1
SPLIT_SEED = 11
TRAIN_SEED = 3
ROWS = {"adult": 2000, "compas": 2000, "german": 1000, "meps": 2000, "mirrored": 2000}


@pytest.fixture(scope="session")
def data_root(tmp_path_factory):
    return tmp_path_factory.mktemp("generated")


@pytest.fixture(scope="session")
def make_dataset(data_root):
    """Session-cached generated datasets under the frozen seeds."""
    cache = {}

    def _make(name):
        if name not in cache:
            csv = data_root / f"{name}.csv"
            generate(name, rows=ROWS[name], seed=GEN_SEED).to_csv(csv, index=False)
            schema = DatasetSchema.from_dict(schema_dict(name))
            cache[name] = load_dataset(str(csv), schema, split_seed=SPLIT_SEED)
        return cache[name]

    return _make


@pytest.fixture(scope="session")
def make_fair(make_dataset):
    cache = {}

    def _make(name):
        if name not in cache:
            cache[name] = prepare_fairness(make_dataset(name))
        return cache[name]

    return _make


def random_metric_inputs(rng, n_max=20):
    """Random small evaluation pool where every metric is defined.

    Resamples until both groups are nonempty and both have a positive label,
    so EOO pools exist.
    """
    while True:
        n = int(rng.integers(4, n_max + 1))
        labels = rng.integers(0, 2, n)
        privileged = rng.integers(0, 2, n).astype(bool)
        if not privileged.any() or privileged.all():
            continue
        if labels[privileged].max(initial=0) == 1 and labels[~privileged].max(initial=0) == 1:
            break
    preds = rng.uniform(0.02, 0.98, n)
    scores = rng.uniform(0.05, 0.95, n)
    c = scores[~privileged].mean() - scores[privileged].mean()
    shifted = scores.copy()
    shifted[privileged] += c
    return preds, labels, privileged, scores, shifted


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
