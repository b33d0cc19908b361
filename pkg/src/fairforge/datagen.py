"""Synthetic stand-ins for the four benchmark decision datasets.

The real benchmarks (census income, recidivism, medical expenditure, credit
scoring) cannot be bundled, so each generator below emits a CSV with the same
column structure, group imbalance, base rates, and, importantly, the same
kind of group-dependent disparity: the unprivileged group's feature
distributions are shifted and the historical labels carry a modest direct
group effect that no feature can explain. Labels are drawn from a logistic
model of the observable columns, so the achievable accuracy is a controlled
ceiling calibrated against the reference baselines.

Each generator is deterministic given (rows, seed). `schema_dict(name)`
returns the matching ingestion schema.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import pandas as pd

DATASET_NAMES = ("adult", "compas", "german", "meps", "mirrored")

DEFAULT_ROWS = {
    "adult": 10000,
    "compas": 6000,
    "german": 1000,
    "meps": 8000,
    "mirrored": 2000,
}


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def adult(rows: int, seed: int) -> pd.DataFrame:
    """Census-income style: predict high earners; sex is the protected axis."""
    rng = np.random.default_rng(seed)
    male = rng.random(rows) < 0.66
    sex = np.where(male, "Male", "Female")

    education_num = np.round(np.clip(rng.normal(10.0 + 0.8 * male, 2.6), 1, 16)).astype(int)
    age = np.round(np.clip(rng.normal(38, 12, rows), 17, 80)).astype(int)
    hours_per_week = np.round(np.clip(rng.normal(36.0 + 4.0 * male, 9.0), 5, 80)).astype(int)
    has_gain = rng.random(rows) < (0.05 + 0.04 * male)
    capital_gain = np.where(has_gain, np.round(rng.lognormal(8.3, 1.1, rows)), 0.0)

    occs = np.array(["clerical", "craft", "exec", "prof", "sales", "service"])
    p_m = np.array([0.10, 0.26, 0.15, 0.13, 0.12, 0.24])
    p_f = np.array([0.24, 0.06, 0.08, 0.15, 0.13, 0.34])
    occupation = np.where(
        male,
        rng.choice(occs, size=rows, p=p_m),
        rng.choice(occs, size=rows, p=p_f),
    )
    occ_eff = pd.Series(occupation).map(
        {"clerical": 0.0, "craft": 0.1, "exec": 0.9, "prof": 0.75,
         "sales": 0.3, "service": -0.45}
    ).to_numpy()

    merit = (
        0.55 * (education_num - 10.0) / 2.6
        + 0.45 * (hours_per_week - 38.0) / 9.0
        + 0.9 * has_gain
        + 0.7 * occ_eff
        + 0.25 * (age - 38.0) / 12.0
    )
    logit = 3.3 * (merit - 0.72) + 0.45 * male
    y = (rng.random(rows) < _sigmoid(logit)).astype(int)

    return pd.DataFrame({
        "age": age,
        "education_num": education_num,
        "hours_per_week": hours_per_week,
        "capital_gain": capital_gain,
        "occupation": occupation,
        "sex": sex,
        "income": np.where(y == 1, ">50K", "<=50K"),
    })


def compas(rows: int, seed: int) -> pd.DataFrame:
    """Recidivism style: race is the protected axis; a small share of rows
    belongs to neither modeled group and is dropped at ingestion."""
    rng = np.random.default_rng(seed)
    race = rng.choice(
        np.array(["African-American", "Caucasian", "Other"]),
        size=rows, p=[0.51, 0.44, 0.05],
    )
    aa = race == "African-American"

    priors_count = np.minimum(
        np.round(rng.gamma(1.1 + 0.7 * aa, 2.2, rows)).astype(int), 38
    )
    age = np.round(np.clip(rng.normal(33.0 - 2.0 * aa, 11.0), 18, 75)).astype(int)
    juv_count = rng.poisson(0.12 + 0.10 * aa, rows)
    felony = rng.random(rows) < (0.60 + 0.05 * aa)
    charge_degree = np.where(felony, "F", "M")

    risk = (
        1.1 * np.log1p(priors_count)
        + 0.5 * juv_count
        + 0.35 * felony
        - 0.55 * (age - 33.0) / 11.0
    )
    logit = 12.0 * (risk - 1.35) + 0.5 * aa
    y = (rng.random(rows) < _sigmoid(logit)).astype(int)

    return pd.DataFrame({
        "age": age,
        "priors_count": priors_count,
        "juv_count": juv_count,
        "charge_degree": charge_degree,
        "race": race,
        "two_year_recid": y,
    })


def german(rows: int, seed: int) -> pd.DataFrame:
    """Credit-scoring style: young applicants (age <= 25) are unprivileged."""
    rng = np.random.default_rng(seed)
    # ~19% of applicants aged 25 or below
    age = np.round(np.clip(rng.gamma(2.0, 7.5, rows) + 19.0, 19, 75)).astype(int)
    old = age > 25

    # credit_history: 0 worst .. 4 best, better for older applicants
    hist_p_old = np.array([0.05, 0.10, 0.50, 0.10, 0.25])
    hist_p_young = np.array([0.12, 0.18, 0.50, 0.08, 0.12])
    credit_history = np.where(
        old,
        rng.choice(5, size=rows, p=hist_p_old),
        rng.choice(5, size=rows, p=hist_p_young),
    )
    hist_eff = np.array([-1.0, -0.5, 0.0, 0.4, 0.9])[credit_history]

    duration_months = np.round(np.clip(rng.normal(21, 11, rows), 4, 72)).astype(int)
    credit_amount = np.round(rng.lognormal(7.9, 0.9, rows)).astype(int)

    savings = rng.choice(np.array(["low", "mid", "high", "unknown"]),
                         size=rows, p=[0.60, 0.17, 0.11, 0.12])
    sav_eff = pd.Series(savings).map(
        {"low": -0.3, "mid": 0.1, "high": 0.6, "unknown": 0.2}).to_numpy()
    employment = rng.choice(np.array(["short", "mid", "long"]),
                            size=rows, p=[0.35, 0.40, 0.25])
    emp_eff = pd.Series(employment).map(
        {"short": -0.25, "mid": 0.1, "long": 0.45}).to_numpy()
    purpose = rng.choice(np.array(["car", "furniture", "radio_tv", "business", "education"]),
                         size=rows, p=[0.33, 0.19, 0.28, 0.10, 0.10])

    credit = (
        0.85 * hist_eff
        - 0.45 * (duration_months - 21.0) / 11.0
        - 0.30 * (np.log(credit_amount) - 7.9) / 0.9
        + 0.55 * sav_eff
        + 0.45 * emp_eff
    )
    logit = 2.45 * (credit + 0.40) + 0.35 * old
    y = (rng.random(rows) < _sigmoid(logit)).astype(int)

    return pd.DataFrame({
        "duration_months": duration_months,
        "credit_amount": credit_amount,
        "age": age,
        "credit_history": credit_history,
        "purpose": purpose,
        "savings": savings,
        "employment": employment,
        "credit_risk": np.where(y == 1, "good", "bad"),
    })


def meps(rows: int, seed: int) -> pd.DataFrame:
    """Healthcare-utilization style: race is the protected axis; physical
    health score is the designated fair feature."""
    rng = np.random.default_rng(seed)
    white = rng.random(rows) < 0.45
    race = np.where(white, "White", "Non-White")

    pcs = np.clip(rng.normal(50.0 - 1.0 * ~white, 9.5), 10, 70).round(2)
    mcs = np.clip(rng.normal(51.0 - 0.5 * ~white, 9.0), 10, 70).round(2)
    age = np.round(np.clip(rng.normal(45, 17, rows), 18, 85)).astype(int)
    num_conditions = rng.poisson(
        np.clip(1.4 + 0.012 * (age - 45) - 0.03 * (pcs - 50), 0.05, None))

    # access barriers carry most of the group disparity, and are observable
    ins = np.array(["private", "public", "uninsured"])
    insurance = np.where(
        white,
        rng.choice(ins, size=rows, p=[0.74, 0.21, 0.05]),
        rng.choice(ins, size=rows, p=[0.26, 0.42, 0.32]),
    )
    ins_eff = pd.Series(insurance).map(
        {"private": 0.55, "public": 0.0, "uninsured": -1.35}).to_numpy()
    usual_provider = np.where(
        rng.random(rows) < np.where(white, 0.88, 0.52), "yes", "no")
    prov_eff = np.where(usual_provider == "yes", 0.55, -0.55)
    region = rng.choice(np.array(["northeast", "midwest", "south", "west"]),
                        size=rows, p=[0.17, 0.21, 0.38, 0.24])

    need = (
        -0.55 * (pcs - 50.0) / 9.5
        - 0.2 * (mcs - 51.0) / 9.0
        + 0.45 * num_conditions
        + 0.3 * (age - 45.0) / 17.0
        + 0.6 * ins_eff
        + 0.5 * prov_eff
    )
    logit = 3.3 * (need - 1.33) + 0.3 * white
    y = (rng.random(rows) < _sigmoid(logit)).astype(int)

    return pd.DataFrame({
        "age": age,
        "pcs": pcs,
        "mcs": mcs,
        "num_conditions": num_conditions,
        "insurance": insurance,
        "usual_provider": usual_provider,
        "region": region,
        "race": race,
        "utilization": np.where(y == 1, "high", "low"),
    })


def mirrored(rows: int, seed: int) -> pd.DataFrame:
    """Two statistically identical groups: every instance appears once per
    group with the same features and label, so any disparity a model shows
    is its own artifact. The designated fair feature carries nearly all the
    label signal, so equally scored individuals have equal true risk.
    """
    rng = np.random.default_rng(seed)
    half = rows // 2
    score1 = rng.normal(0, 1, half).round(4)
    score2 = rng.normal(0, 1, half).round(4)
    category = rng.choice(np.array(["low", "mid", "high"]), size=half)
    logit = 2.2 * score1
    y = (rng.random(half) < _sigmoid(logit)).astype(int)

    df = pd.DataFrame({
        "score1": np.concatenate([score1, score1]),
        "score2": np.concatenate([score2, score2]),
        "category": np.concatenate([category, category]),
        "group": np.array(["A"] * half + ["B"] * half),
        "outcome": np.concatenate([y, y]),
    })
    order = rng.permutation(len(df))
    return df.iloc[order].reset_index(drop=True)


_GENERATORS = {
    "adult": adult,
    "compas": compas,
    "german": german,
    "meps": meps,
    "mirrored": mirrored,
}

_SCHEMAS = {
    "adult": {
        "name": "adult",
        "label_column": "income",
        "positive_label_value": ">50K",
        "protected_column": "sex",
        "privileged_value": "Male",
        "fair_feature_columns": ["education_num"],
        "numeric_columns": ["age", "education_num", "hours_per_week", "capital_gain"],
        "categorical_columns": ["occupation"],
    },
    "compas": {
        "name": "compas",
        "label_column": "two_year_recid",
        "positive_label_value": "1",
        "protected_column": "race",
        "privileged_value": "Caucasian",
        "unprivileged_value": "African-American",
        "fair_feature_columns": ["priors_count"],
        "numeric_columns": ["age", "priors_count", "juv_count"],
        "categorical_columns": ["charge_degree"],
    },
    "german": {
        "name": "german",
        "label_column": "credit_risk",
        "positive_label_value": "good",
        "protected_column": "age",
        "privileged_value": "> 25",
        "fair_feature_columns": ["credit_history"],
        "numeric_columns": ["duration_months", "credit_amount", "credit_history"],
        "categorical_columns": ["purpose", "savings", "employment"],
    },
    "meps": {
        "name": "meps",
        "label_column": "utilization",
        "positive_label_value": "high",
        "protected_column": "race",
        "privileged_value": "White",
        "fair_feature_columns": ["pcs"],
        "numeric_columns": ["age", "pcs", "mcs", "num_conditions"],
        "categorical_columns": ["insurance", "usual_provider", "region"],
    },
    # score2/category are context columns the schema deliberately leaves out:
    # with score1 the sole model input, equally scored individuals get equal
    # predictions and the symmetry check isolates the metrics themselves.
    "mirrored": {
        "name": "mirrored",
        "label_column": "outcome",
        "positive_label_value": "1",
        "protected_column": "group",
        "privileged_value": "A",
        "fair_feature_columns": ["score1"],
        "numeric_columns": ["score1"],
        "categorical_columns": [],
    },
}


def generate(name: str, rows: int | None = None, seed: int = 1) -> pd.DataFrame:
    if name not in _GENERATORS:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(_GENERATORS)}")
    if rows is None:
        rows = DEFAULT_ROWS[name]
    return _GENERATORS[name](rows, seed)


def schema_dict(name: str) -> dict:
    if name not in _SCHEMAS:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(_SCHEMAS)}")
    return json.loads(json.dumps(_SCHEMAS[name]))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m fairforge.datagen",
        description="Generate a synthetic benchmark stand-in CSV (and schema).",
    )
    parser.add_argument("--name", required=True, choices=sorted(_GENERATORS))
    parser.add_argument("--rows", type=int, default=None)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--schema-out", default=None, help="also write the schema JSON here")
    args = parser.parse_args(argv)

    df = generate(args.name, args.rows, args.seed)
    df.to_csv(args.out, index=False)
    print(f"wrote {len(df)} rows to {args.out}")
    if args.schema_out:
        with open(args.schema_out, "w") as fh:
            json.dump(schema_dict(args.name), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote schema to {args.schema_out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
