import json

import numpy as np
import pandas as pd
import pytest

from fairforge.data import (
    DatasetSchema,
    TabularDataset,
    class_distribution,
    load_dataset,
)
from fairforge.errors import EmptyGroupError, MissingColumnError, NonBinaryLabelError


def _basic_schema(**overrides):
    base = {
        "name": "toy",
        "label_column": "outcome",
        "positive_label_value": "yes",
        "protected_column": "group",
        "privileged_value": "A",
        "fair_feature_columns": ["score"],
        "numeric_columns": ["score", "amount"],
        "categorical_columns": ["color"],
    }
    base.update(overrides)
    return DatasetSchema.from_dict(base)


def _toy_frame(n=60, seed=0):
    rng = np.random.default_rng(seed)
    return pd.DataFrame({
        "outcome": rng.choice(["yes", "no"], n),
        "group": rng.choice(["A", "B"], n),
        "score": rng.normal(0, 1, n).round(3),
        "amount": rng.uniform(10, 99, n).round(2),
        "color": rng.choice(["red", "green", "blue"], n),
    })


def _write(tmp_path, df, name="toy.csv"):
    path = tmp_path / name
    df.to_csv(path, index=False)
    return str(path)


def test_schema_validation_rejects_bad_configs():
    with pytest.raises(ValueError, match="fair_feature_columns"):
        _basic_schema(fair_feature_columns=["nonexistent"])
    with pytest.raises(ValueError, match="protected column"):
        _basic_schema(numeric_columns=["score", "amount", "group"])
    with pytest.raises(ValueError, match="label column"):
        _basic_schema(numeric_columns=["score", "amount", "outcome"])
    with pytest.raises(ValueError, match="both numeric and categorical"):
        _basic_schema(categorical_columns=["color", "score"])
    with pytest.raises(ValueError, match="unknown schema fields"):
        DatasetSchema.from_dict({"name": "x", "bogus": 1})


def test_load_dataset_shapes_and_encoding(tmp_path):
    df = _toy_frame()
    ds = load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)
    assert ds.n == 60
    # 2 numerics + 3 one-hot colors
    assert ds.feature_names == ["score", "amount", "color=blue", "color=green", "color=red"]
    assert ds.dim == 5
    assert ds.vocabulary["color"] == ["blue", "green", "red"]
    assert set(np.unique(ds.labels)) <= {0, 1}
    # protected column stays out of the features
    assert all("group" not in name for name in ds.feature_names)
    # fair features are raw-scale
    train = ds.split_indices("train")
    raw_scores = df["score"].to_numpy()
    assert ds.fair_feature_names == ["score"]
    np.testing.assert_allclose(np.sort(ds.fair_features[:, 0]), np.sort(raw_scores))


def test_zscore_uses_train_statistics_only(tmp_path):
    df = _toy_frame()
    ds = load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)
    train = ds.split_indices("train")
    col = ds.feature_names.index("amount")
    mean, std = ds.zscore_stats["amount"]
    raw = df["amount"].to_numpy()
    np.testing.assert_allclose(ds.features[:, col], (raw - mean) / std)
    assert mean == pytest.approx(raw[train].mean())
    assert std == pytest.approx(raw[train].std())
    # train column is standardized, full column generally is not
    assert ds.features[train, col].mean() == pytest.approx(0.0, abs=1e-12)


def test_splits_are_stratified_disjoint_and_deterministic(tmp_path):
    df = _toy_frame(n=200, seed=3)
    path = _write(tmp_path, df)
    ds1 = load_dataset(path, _basic_schema(), split_seed=7)
    ds2 = load_dataset(path, _basic_schema(), split_seed=7)
    np.testing.assert_array_equal(ds1.split, ds2.split)
    ds3 = load_dataset(path, _basic_schema(), split_seed=8)
    assert (ds1.split != ds3.split).any()

    idx = [ds1.split_indices(t) for t in ("train", "dev", "test")]
    assert sum(len(i) for i in idx) == ds1.n
    assert len(np.intersect1d(idx[0], idx[1])) == 0
    assert len(idx[0]) == round(0.6 * ds1.n)
    # every (group, label) stratum appears in every split
    for tag in ("train", "dev", "test"):
        sel = ds1.split == tag
        for g in (True, False):
            for y in (0, 1):
                assert ((ds1.privileged == g) & (ds1.labels == y) & sel).any()


def test_privileged_comparison_syntax(tmp_path):
    df = _toy_frame()
    df["age"] = np.linspace(18, 70, len(df)).round(1)
    schema = _basic_schema(protected_column="age", privileged_value="> 25")
    ds = load_dataset(_write(tmp_path, df), schema, split_seed=5)
    np.testing.assert_array_equal(ds.privileged, df["age"].to_numpy() > 25)

    bad = df.copy()
    bad["age"] = bad["age"].astype(object)
    bad.loc[0, "age"] = "unknown"
    with pytest.raises(ValueError, match="non-numeric"):
        load_dataset(_write(tmp_path, bad, "bad.csv"), schema, split_seed=5)


def test_unprivileged_value_binarizes_and_drops_rest(tmp_path):
    df = _toy_frame(n=120, seed=9)
    df["group"] = np.random.default_rng(4).choice(["A", "B", "C"], 120)
    schema = _basic_schema(unprivileged_value="B")
    ds = load_dataset(_write(tmp_path, df), schema, split_seed=5)
    kept = df["group"].isin(["A", "B"]).sum()
    assert ds.n == kept
    assert ds.dropped_unmatched_group == 120 - kept


def test_missing_rows_dropped_and_counted(tmp_path):
    df = _toy_frame()
    df.loc[3, "score"] = np.nan
    df.loc[7, "color"] = np.nan
    ds = load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)
    assert ds.n == 58
    assert ds.dropped_missing == 2


def test_missing_column_and_nonbinary_label_raise(tmp_path):
    df = _toy_frame().drop(columns=["amount"])
    with pytest.raises(MissingColumnError, match="amount"):
        load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)

    df = _toy_frame()
    df.loc[0, "outcome"] = "maybe"
    with pytest.raises(NonBinaryLabelError):
        load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)


def test_single_group_dataset_raises(tmp_path):
    df = _toy_frame()
    df["group"] = "A"
    with pytest.raises(EmptyGroupError):
        load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)


def test_row_limit_subsamples_before_split(tmp_path):
    df = _toy_frame(n=200, seed=3)
    path = _write(tmp_path, df)
    ds = load_dataset(path, _basic_schema(), split_seed=7, row_limit=80)
    assert ds.n == 80
    ds2 = load_dataset(path, _basic_schema(), split_seed=7, row_limit=80)
    assert ds.to_json() == ds2.to_json()
    with pytest.raises(ValueError):
        load_dataset(path, _basic_schema(), split_seed=7, row_limit=0)


def test_container_round_trip_is_byte_stable(tmp_path):
    ds = load_dataset(_write(tmp_path, _toy_frame()), _basic_schema(), split_seed=5)
    path = tmp_path / "container.json"
    ds.save(path)
    loaded = TabularDataset.load(path)
    assert loaded.to_json() == ds.to_json()
    np.testing.assert_array_equal(loaded.features, ds.features)
    np.testing.assert_array_equal(loaded.privileged, ds.privileged)

    with pytest.raises(ValueError, match="container"):
        TabularDataset.from_container({"kind": "other", "version": 1})


def test_class_distribution_counts(tmp_path):
    ds = load_dataset(_write(tmp_path, _toy_frame()), _basic_schema(), split_seed=5)
    dist = class_distribution(ds)
    total = sum(c["count"] for c in dist.cells)
    assert total == ds.n
    for cell in dist.cells:
        mask = (ds.privileged == (cell["group"] == "privileged")) & (ds.labels == cell["label"])
        assert cell["count"] == int(mask.sum())
    assert dist.missing_groups == []


def test_whitespace_in_values_is_stripped(tmp_path):
    df = _toy_frame()
    df["group"] = " " + df["group"] + "  "
    df["outcome"] = df["outcome"] + " "
    ds = load_dataset(_write(tmp_path, df), _basic_schema(), split_seed=5)
    assert ds.privileged.any() and (~ds.privileged).any()
    assert set(np.unique(ds.labels)) == {0, 1}
