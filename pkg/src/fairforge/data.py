"""CSV ingestion: schema-driven preprocessing and deterministic stratified splits.

A dataset is described by a JSON schema naming the label, the protected
attribute, the designated fair features, and the numeric/categorical feature
columns. Loading binarizes the label and the protected attribute, one-hot
encodes categoricals (lexicographic category order), z-scores numerics with
train-split statistics, and assigns stratified train/dev/test tags. The
protected column never enters the feature matrix; it survives only as the
group vector.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from fairforge.errors import (
    EmptyGroupError,
    MissingColumnError,
    NonBinaryLabelError,
)

log = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")
DEFAULT_FRACTIONS = (0.6, 0.2, 0.2)

_COMPARISON = re.compile(r"^\s*(<=|>=|<|>)\s*(-?\d+(?:\.\d+)?)\s*$")


@dataclass
class DatasetSchema:
    """Declarative description of one decision dataset.

    ``privileged_value`` is either a literal category value or a numeric
    comparison such as ``">25"`` (privileged iff the raw value satisfies it).
    ``unprivileged_value`` optionally names the single unprivileged category;
    rows matching neither value are then dropped, which is how e.g. a race
    column is binarized to exactly two categories.
    """

    name: str
    label_column: str
    positive_label_value: str
    protected_column: str
    privileged_value: str
    fair_feature_columns: list[str]
    numeric_columns: list[str]
    categorical_columns: list[str]
    drop_columns: list[str] = field(default_factory=list)
    unprivileged_value: str | None = None

    def __post_init__(self):
        feature_cols = set(self.numeric_columns) | set(self.categorical_columns)
        unknown_fair = [c for c in self.fair_feature_columns if c not in feature_cols]
        if unknown_fair:
            raise ValueError(
                f"fair_feature_columns not in numeric/categorical columns: {unknown_fair}"
            )
        if self.protected_column in feature_cols:
            raise ValueError(
                f"protected column {self.protected_column!r} may not be a model feature"
            )
        if self.label_column in feature_cols or self.label_column in self.fair_feature_columns:
            raise ValueError(f"label column {self.label_column!r} may not be a feature")
        overlap = set(self.numeric_columns) & set(self.categorical_columns)
        if overlap:
            raise ValueError(f"columns listed as both numeric and categorical: {sorted(overlap)}")

    @property
    def referenced_columns(self) -> list[str]:
        return [self.label_column, self.protected_column] + self.numeric_columns + self.categorical_columns

    @classmethod
    def from_json(cls, path) -> "DatasetSchema":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "DatasetSchema":
        known = {
            "name", "label_column", "positive_label_value", "protected_column",
            "privileged_value", "unprivileged_value", "fair_feature_columns",
            "numeric_columns", "categorical_columns", "drop_columns",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown schema fields: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "label_column": self.label_column,
            "positive_label_value": self.positive_label_value,
            "protected_column": self.protected_column,
            "privileged_value": self.privileged_value,
            "unprivileged_value": self.unprivileged_value,
            "fair_feature_columns": list(self.fair_feature_columns),
            "numeric_columns": list(self.numeric_columns),
            "categorical_columns": list(self.categorical_columns),
            "drop_columns": list(self.drop_columns),
        }


@dataclass
class TabularDataset:
    """Preprocessed instances ready for training and fairness evaluation.

    ``features`` holds z-scored numerics plus one-hot categoricals;
    ``fair_features`` holds the designated fair columns encoded the same way
    but on raw scale (no z-scoring). ``privileged`` is the group vector; the
    protected attribute appears nowhere in the feature matrices.
    """

    schema: DatasetSchema
    features: np.ndarray          # (N, d) float64
    feature_names: list[str]
    labels: np.ndarray            # (N,) int, values {0, 1}
    privileged: np.ndarray        # (N,) bool
    fair_features: np.ndarray     # (N, d_f) float64
    fair_feature_names: list[str]
    split: np.ndarray             # (N,) unicode, values in SPLITS
    zscore_stats: dict[str, tuple[float, float]]  # numeric column -> (train mean, train std)
    vocabulary: dict[str, list[str]]              # categorical column -> lexicographic categories
    dropped_missing: int = 0
    dropped_unmatched_group: int = 0

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def split_indices(self, tag: str) -> np.ndarray:
        if tag not in SPLITS:
            raise ValueError(f"unknown split {tag!r}")
        return np.flatnonzero(self.split == tag)

    def to_container(self) -> dict:
        return {
            "version": 1,
            "kind": "fairforge.dataset",
            "schema": self.schema.to_dict(),
            "feature_names": list(self.feature_names),
            "features": self.features.tolist(),
            "labels": self.labels.tolist(),
            "group": ["privileged" if p else "unprivileged" for p in self.privileged],
            "fair_feature_names": list(self.fair_feature_names),
            "fair_features": self.fair_features.tolist(),
            "split": self.split.tolist(),
            "zscore_stats": {k: [v[0], v[1]] for k, v in self.zscore_stats.items()},
            "vocabulary": self.vocabulary,
            "dropped_missing": self.dropped_missing,
            "dropped_unmatched_group": self.dropped_unmatched_group,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_container(), sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_container(cls, raw: dict) -> "TabularDataset":
        if raw.get("kind") != "fairforge.dataset" or raw.get("version") != 1:
            raise ValueError("not a version-1 fairforge dataset container")
        return cls(
            schema=DatasetSchema.from_dict(raw["schema"]),
            features=np.asarray(raw["features"], dtype=np.float64).reshape(len(raw["labels"]), -1),
            feature_names=list(raw["feature_names"]),
            labels=np.asarray(raw["labels"], dtype=np.int64),
            privileged=np.asarray([g == "privileged" for g in raw["group"]], dtype=bool),
            fair_features=np.asarray(raw["fair_features"], dtype=np.float64).reshape(len(raw["labels"]), -1),
            fair_feature_names=list(raw["fair_feature_names"]),
            split=np.asarray(raw["split"], dtype="U5"),
            zscore_stats={k: (v[0], v[1]) for k, v in raw["zscore_stats"].items()},
            vocabulary={k: list(v) for k, v in raw["vocabulary"].items()},
            dropped_missing=raw.get("dropped_missing", 0),
            dropped_unmatched_group=raw.get("dropped_unmatched_group", 0),
        )

    @classmethod
    def load(cls, path) -> "TabularDataset":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_container(json.load(fh))


@dataclass
class ClassDistribution:
    """Per (group x label) counts and within-group proportions."""

    cells: list[dict]          # {"group", "label", "count", "proportion"}
    missing_groups: list[str]  # groups absent from the dataset (flagged, not an error)

    def to_dict(self) -> dict:
        return {"cells": self.cells, "missing_groups": self.missing_groups}


def _clean_string(value) -> str:
    return str(value).strip()


def _privileged_mask(raw_values: pd.Series, schema: DatasetSchema) -> tuple[np.ndarray, np.ndarray]:
    """Returns (privileged mask, keep mask) over the raw protected column."""
    expr = _COMPARISON.match(schema.privileged_value)
    if expr is not None:
        op, threshold = expr.group(1), float(expr.group(2))
        numeric = pd.to_numeric(raw_values, errors="coerce")
        if numeric.isna().any():
            bad = raw_values[numeric.isna()].iloc[0]
            raise ValueError(
                f"protected column {schema.protected_column!r} has non-numeric value "
                f"{bad!r} but privileged_value is the comparison {schema.privileged_value!r}"
            )
        arr = numeric.to_numpy(dtype=np.float64)
        if op == "<=":
            priv = arr <= threshold
        elif op == "<":
            priv = arr < threshold
        elif op == ">=":
            priv = arr >= threshold
        else:
            priv = arr > threshold
        return priv, np.ones(len(arr), dtype=bool)

    cleaned = raw_values.map(_clean_string).to_numpy()
    priv = cleaned == schema.privileged_value
    if schema.unprivileged_value is not None:
        unpriv = cleaned == schema.unprivileged_value
        keep = priv | unpriv
    else:
        keep = np.ones(len(cleaned), dtype=bool)
    return priv, keep


def _stratified_split(
    strata_keys: np.ndarray,
    fractions: tuple[float, float, float],
    seed: int,
) -> np.ndarray:
    """Assigns each row a split tag, stratified by the given per-row keys.

    Within each stratum rows are shuffled with the seeded generator and split
    counts follow the largest-remainder rule; ties are resolved toward the
    split with the largest global deficit so overall counts land on the
    requested fractions.
    """
    n = len(strata_keys)
    rng = np.random.default_rng(seed)
    tags = np.empty(n, dtype="U5")
    fractions = np.asarray(fractions, dtype=np.float64)

    allocated = np.zeros(3, dtype=np.int64)
    processed = 0
    for key in sorted(set(strata_keys.tolist())):
        idx = np.flatnonzero(strata_keys == key)
        rng.shuffle(idx)
        n_s = len(idx)
        processed += n_s
        quota = fractions * n_s
        counts = np.floor(quota).astype(np.int64)
        leftover = n_s - counts.sum()
        remainders = quota - counts
        deficit = fractions * processed - (allocated + counts)
        # Rank candidate splits per leftover unit: big remainder first, then
        # deficit, then fixed split order.
        order = sorted(range(3), key=lambda s: (-remainders[s], -deficit[s], s))
        for s in order[:leftover]:
            counts[s] += 1
        allocated += counts
        bounds = np.cumsum(counts)
        tags[idx[: bounds[0]]] = "train"
        tags[idx[bounds[0]: bounds[1]]] = "dev"
        tags[idx[bounds[1]:]] = "test"
    return tags


def load_dataset(
    csv_path,
    schema: DatasetSchema,
    split_seed: int,
    split_fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    row_limit: int | None = None,
) -> TabularDataset:
    """Loads and preprocesses a CSV decision dataset.

    Deterministic for a fixed (csv, schema, seed): the categorical vocabulary
    is lexicographic, the split shuffle is seeded, and z-score statistics come
    from the train split only. row_limit subsamples that many rows uniformly
    (seeded by split_seed) after cleaning, for fast qualitative runs.
    """
    if abs(sum(split_fractions) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {split_fractions}")
    if min(split_fractions) < 0:
        raise ValueError("split fractions must be nonnegative")
    if row_limit is not None and row_limit < 1:
        raise ValueError("row_limit must be positive")

    df = pd.read_csv(csv_path, skipinitialspace=True)
    missing_cols = [c for c in schema.referenced_columns if c not in df.columns]
    if missing_cols:
        raise MissingColumnError(f"columns missing from {csv_path}: {missing_cols}")
    df = df.drop(columns=[c for c in schema.drop_columns if c in df.columns])

    # Missing-value policy: drop rows with NaN in any referenced column.
    before = len(df)
    df = df.dropna(subset=schema.referenced_columns).reset_index(drop=True)
    dropped_missing = before - len(df)
    if dropped_missing:
        log.info("dropped %d rows with missing values in schema columns", dropped_missing)

    raw_labels = df[schema.label_column].map(_clean_string)
    distinct = sorted(raw_labels.unique().tolist())
    if len(distinct) > 2:
        raise NonBinaryLabelError(
            f"label column {schema.label_column!r} has {len(distinct)} distinct values: {distinct[:5]}..."
        )
    labels = (raw_labels == schema.positive_label_value).to_numpy().astype(np.int64)

    priv, keep = _privileged_mask(df[schema.protected_column], schema)
    dropped_unmatched = int((~keep).sum())
    if dropped_unmatched:
        log.info(
            "dropped %d rows whose protected value matches neither group", dropped_unmatched
        )
        df = df.loc[keep].reset_index(drop=True)
        labels = labels[keep]
        priv = priv[keep]

    n = len(df)
    if n == 0:
        raise EmptyGroupError("no rows remain after filtering")

    if row_limit is not None and row_limit < n:
        take = np.sort(np.random.default_rng(split_seed).choice(n, size=row_limit, replace=False))
        df = df.iloc[take].reset_index(drop=True)
        labels = labels[take]
        priv = priv[take]
        n = row_limit

    # Vocabulary over the full dataset, lexicographic for determinism.
    vocabulary = {
        col: sorted(df[col].map(_clean_string).unique().tolist())
        for col in schema.categorical_columns
        if col in df.columns
    }

    strata = np.array(
        [f"{int(p)}|{int(y)}" for p, y in zip(priv, labels)], dtype=object
    )
    for key in ("0|0", "0|1", "1|0", "1|1"):
        if key not in set(strata.tolist()):
            group_name = "privileged" if key[0] == "1" else "unprivileged"
            raise EmptyGroupError(
                f"(group={group_name}, label={key[2]}) stratum is empty; cannot stratify"
            )
    split = _stratified_split(strata, tuple(split_fractions), split_seed)

    for tag in SPLITS:
        if split_fractions[SPLITS.index(tag)] == 0:
            continue
        mask = split == tag
        if not mask.any():
            raise EmptyGroupError(f"split {tag!r} received no rows; dataset too small")
        if priv[mask].all() or (~priv[mask]).all():
            raise EmptyGroupError(f"split {tag!r} lacks one group; dataset too small to stratify")
        if labels[mask].min() == labels[mask].max():
            raise EmptyGroupError(f"split {tag!r} lacks one label value; dataset too small to stratify")

    train_mask = split == "train"

    def encode(columns_numeric, columns_categorical, zscore):
        blocks, names = [], []
        stats = {}
        for col in columns_numeric:
            values = pd.to_numeric(df[col], errors="coerce").to_numpy(dtype=np.float64)
            if np.isnan(values).any():
                raise ValueError(f"numeric column {col!r} has non-numeric entries")
            if zscore:
                mean = float(values[train_mask].mean())
                std = float(values[train_mask].std())
                if std == 0.0:
                    std = 1.0
                stats[col] = (mean, std)
                values = (values - mean) / std
            blocks.append(values[:, None])
            names.append(col)
        for col in columns_categorical:
            cleaned = df[col].map(_clean_string).to_numpy()
            for cat in vocabulary[col]:
                blocks.append((cleaned == cat).astype(np.float64)[:, None])
                names.append(f"{col}={cat}")
        if blocks:
            matrix = np.concatenate(blocks, axis=1)
        else:
            matrix = np.zeros((n, 0), dtype=np.float64)
        return matrix, names, stats

    features, feature_names, zscore_stats = encode(
        schema.numeric_columns, schema.categorical_columns, zscore=True
    )
    fair_numeric = [c for c in schema.fair_feature_columns if c in schema.numeric_columns]
    fair_categorical = [c for c in schema.fair_feature_columns if c in schema.categorical_columns]
    fair_features, fair_names, _ = encode(fair_numeric, fair_categorical, zscore=False)

    return TabularDataset(
        schema=schema,
        features=features,
        feature_names=feature_names,
        labels=labels,
        privileged=priv,
        fair_features=fair_features,
        fair_feature_names=fair_names,
        split=split,
        zscore_stats=zscore_stats,
        vocabulary=vocabulary,
        dropped_missing=dropped_missing,
        dropped_unmatched_group=dropped_unmatched,
    )


def class_distribution(ds: TabularDataset) -> ClassDistribution:
    """Counts and within-group proportions per (group, label) cell."""
    if ds.n == 0:
        raise ValueError("dataset is empty")
    cells = []
    present = []
    for group_name, mask in (("privileged", ds.privileged), ("unprivileged", ~ds.privileged)):
        total = int(mask.sum())
        if total == 0:
            continue
        present.append(group_name)
        for label in (0, 1):
            count = int((mask & (ds.labels == label)).sum())
            cells.append(
                {
                    "group": group_name,
                    "label": label,
                    "count": count,
                    "proportion": count / total,
                }
            )
    missing = [g for g in ("privileged", "unprivileged") if g not in present]
    return ClassDistribution(cells=cells, missing_groups=missing)
