import dataclasses
import json
import math

import numpy as np
import pytest

from fairforge.errors import NonFiniteError
from fairforge.metrics import METRIC_IDS
from fairforge.model import init_params
from fairforge.training import (
    TrainConfig,
    gradient,
    jsonable_trace_record,
    objective,
    objective_and_grads,
    prepare_fairness,
    train,
)


def test_train_config_validation():
    with pytest.raises(ValueError, match="weights"):
        TrainConfig(lambda_=1.0, weights=[0.5, 0.5])
    with pytest.raises(ValueError, match="nonnegative"):
        TrainConfig(lambda_=1.0, weights=[-1.0] + [0.0] * 7)
    with pytest.raises(ValueError):
        TrainConfig(lambda_=-0.5)
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError, match="sum to 1"):
        TrainConfig(weights=[0.5] * 8, normalize_weights=True)
    cfg = TrainConfig(lambda_=1.0, weights=[0.125] * 8, normalize_weights=True)
    assert cfg.active_metric_ids == METRIC_IDS
    # with lambda = 0 no metric enters the objective
    assert TrainConfig(weights=[0.125] * 8, normalize_weights=True).active_metric_ids == []


def test_train_config_defaults_match_training_recipe():
    cfg = TrainConfig()
    assert cfg.lambda_ == 0.0
    assert cfg.learning_rate == pytest.approx(1e-4)
    assert cfg.epochs == 2000
    assert cfg.adam_beta1 == pytest.approx(0.9)
    assert cfg.adam_beta2 == pytest.approx(0.999)
    assert cfg.adam_epsilon == pytest.approx(1e-8)


def test_train_config_round_trip_and_aliases():
    cfg = TrainConfig(lambda_=2.0, weights=[0, 0, 0, 0, 0, 0, 1.0, 0], seed=9)
    d = cfg.to_dict()
    assert d["lambda"] == 2.0
    assert d["weights"]["group.intersectional.outcome"] == 1.0
    back = TrainConfig.from_dict(d)
    assert back == cfg
    # list weights and lambda_ alias also accepted
    alt = TrainConfig.from_dict({"lambda_": 2.0, "weights": [0, 0, 0, 0, 0, 0, 1.0, 0], "seed": 9})
    assert alt == cfg
    with pytest.raises(ValueError, match="unknown"):
        TrainConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError, match="unknown metric"):
        TrainConfig.from_dict({"weights": {"not.a.metric": 1.0}})


def test_objective_components_tie_out(make_dataset, make_fair):
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    params = init_params(ds.dim, seed=0)

    plain = TrainConfig(lambda_=0.0)
    f0, bce0, pen0 = objective(params, ds, plain, fair)
    assert pen0 is None
    assert f0 == pytest.approx(bce0)

    weights = [0.0] * 8
    weights[METRIC_IDS.index("group.intersectional.outcome")] = 1.0
    cfg = TrainConfig(lambda_=0.7, weights=weights)
    f1, bce1, pen1 = objective(params, ds, cfg, fair)
    assert bce1 == pytest.approx(bce0)
    assert pen1 is not None and 0 < pen1 <= 1
    assert f1 == pytest.approx(bce1 - 0.7 * pen1)


def test_gradient_matches_finite_differences_small(make_dataset, make_fair):
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    weights = [0.0] * 8
    weights[METRIC_IDS.index("group.infra_marginal.outcome")] = 0.6
    weights[METRIC_IDS.index("individual.intersectional.eoo")] = 0.4
    cfg = TrainConfig(lambda_=0.9, weights=weights)
    params = init_params(ds.dim, seed=2)
    grads = gradient(params, ds, cfg, fair)

    rng = np.random.default_rng(0)
    step = 1e-6
    for key in ("w1", "b1", "w2", "b2"):
        arr = getattr(params, key)
        flat = np.atleast_1d(arr.ravel())
        g = np.atleast_1d(grads[key].ravel())
        picks = rng.choice(flat.size, size=min(6, flat.size), replace=False)
        for i in picks:
            orig = flat[i]
            flat[i] = orig + step
            up, _, _ = objective(params, ds, cfg, fair)
            flat[i] = orig - step
            down, _, _ = objective(params, ds, cfg, fair)
            flat[i] = orig
            fd = (up - down) / (2 * step)
            denom = max(abs(fd), abs(g[i]), 1e-6)
            assert abs(g[i] - fd) / denom < 1e-4, (key, i)


def test_train_runs_and_traces(make_dataset, make_fair):
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    cfg = TrainConfig(lambda_=0.5, weights=[0, 0, 0, 0, 0, 0, 1.0, 0],
                      epochs=12, seed=1)
    result = train(ds, cfg, fair)
    assert len(result.trace.epochs) == 12
    first = result.trace.epochs[0]
    assert set(first) == {"epoch", "objective", "bce", "penalty",
                          "dev_accuracy", "dev_metrics"}
    assert first["penalty"] is not None
    assert result.trace.final_test["decision_threshold"] == 0.5
    assert set(result.evaluations) == {"train", "dev", "test"}
    for split_eval in result.evaluations.values():
        assert 0.0 <= split_eval["accuracy"] <= 1.0
        assert set(split_eval["metrics"]) == set(METRIC_IDS)


def test_train_is_deterministic(make_dataset, make_fair):
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    cfg = TrainConfig(epochs=8, seed=4)
    r1 = train(ds, cfg, fair)
    r2 = train(ds, cfg, fair)
    assert json.dumps(r1.params.to_jsonable()) == json.dumps(r2.params.to_jsonable())
    assert r1.evaluations == r2.evaluations


def test_objective_decreases_over_training(make_dataset, make_fair):
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    result = train(ds, TrainConfig(epochs=300, seed=1), fair)
    first = result.trace.epochs[0]["objective"]
    last = result.trace.epochs[-1]["objective"]
    assert last < first


def test_non_finite_input_raises_with_trace(make_dataset, make_fair):
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    poisoned = ds.features.copy()
    poisoned[ds.split_indices("train")[0], 0] = np.nan
    bad = dataclasses.replace(ds, features=poisoned)
    with pytest.raises(NonFiniteError) as err:
        train(bad, TrainConfig(epochs=3, seed=0), fair)
    assert err.value.trace is not None


def test_jsonable_trace_record_rounds_floats():
    record = {"epoch": 3, "objective": 0.123456789012345678,
              "dev_metrics": {"a": 1 / 3, "b": None}}
    out = jsonable_trace_record(record)
    assert out["epoch"] == 3
    assert out["objective"] == float(f"{record['objective']:.12g}")
    assert out["dev_metrics"]["a"] == float(f"{1 / 3:.12g}")
    assert out["dev_metrics"]["b"] is None
    assert math.isfinite(out["objective"])


def test_prepare_fairness_builds_all_contexts(make_dataset):
    fair = prepare_fairness(make_dataset("mirrored"))
    assert set(fair.contexts) == {"train", "dev", "test"}
    for split, ctx in fair.contexts.items():
        assert ctx.n == len(make_dataset("mirrored").split_indices(split))


def test_bce_only_gradient_path_matches_fd(make_dataset, make_fair):
    # lambda = 0 path skips the penalty machinery entirely
    ds = make_dataset("mirrored")
    fair = make_fair("mirrored")
    cfg = TrainConfig(lambda_=0.0)
    params = init_params(ds.dim, seed=3)
    grads = gradient(params, ds, cfg, fair)
    step = 1e-6
    w2 = params.w2
    for i in (0, 5, 20):
        orig = w2[i]
        w2[i] = orig + step
        up, _, _ = objective(params, ds, cfg, fair)
        w2[i] = orig - step
        down, _, _ = objective(params, ds, cfg, fair)
        w2[i] = orig
        fd = (up - down) / (2 * step)
        assert grads["w2"][i] == pytest.approx(fd, rel=1e-4, abs=1e-10)
