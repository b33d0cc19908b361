"""Training loop for the fairness-regularized classifier.

The objective is mean binary cross-entropy minus a weighted sum of the eight
fairness metrics scaled by a strength knob:

    f(theta) = BCE(theta) - lambda * sum_m w_m * R_m(theta)

Metrics enter through the predicted probabilities on the training split, with
their matchings precomputed and frozen, so the whole gradient is analytic.
Optimization is full-batch Adam for a fixed number of epochs; every epoch is
traced with the training objective and a dev-split evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fairforge.data import TabularDataset
from fairforge.errors import EmptyGroupError, EmptyMatchingError, NonFiniteError
from fairforge.fairrisk import FairRiskModel, FairRiskProfile, _sig12, build_profile, fit_fair_risk
from fairforge.metrics import (
    METRIC_IDS,
    METRIC_SPECS,
    EvalContext,
    compute_all_metrics,
    compute_metric,
    make_eval_context,
)
from fairforge.model import ModelParams, backward, forward, grad_logits_from_probs, init_params

DEFAULT_LEARNING_RATE = 1e-4
DEFAULT_EPOCHS = 2000


@dataclass
class TrainConfig:
    """One training run: penalty strength, metric weights, optimizer knobs."""

    lambda_: float = 0.0
    weights: list = field(default_factory=lambda: [0.0] * len(METRIC_IDS))
    learning_rate: float = DEFAULT_LEARNING_RATE
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    normalize_weights: bool = False

    def __post_init__(self):
        self.weights = [float(w) for w in self.weights]
        if len(self.weights) != len(METRIC_IDS):
            raise ValueError(f"weights must have {len(METRIC_IDS)} entries")
        if any(w < 0 for w in self.weights):
            raise ValueError("metric weights must be nonnegative")
        if self.normalize_weights and abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("normalized weights must sum to 1")
        if self.lambda_ < 0:
            raise ValueError("lambda must be nonnegative")
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")

    @property
    def active_metric_ids(self) -> list:
        if self.lambda_ == 0:
            return []
        return [m for m, w in zip(METRIC_IDS, self.weights) if w > 0]

    def weights_by_id(self) -> dict:
        return dict(zip(METRIC_IDS, self.weights))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambda_,
            "weights": self.weights_by_id(),
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "seed": self.seed,
            "adam_beta1": self.adam_beta1,
            "adam_beta2": self.adam_beta2,
            "adam_epsilon": self.adam_epsilon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        lam = d.pop("lambda", d.pop("lambda_", 0.0))
        weights = d.pop("weights", None)
        if weights is None:
            weights = [0.0] * len(METRIC_IDS)
        elif isinstance(weights, dict):
            unknown = set(weights) - set(METRIC_IDS)
            if unknown:
                raise ValueError(f"unknown metric ids in weights: {sorted(unknown)}")
            weights = [float(weights.get(m, 0.0)) for m in METRIC_IDS]
        allowed = {"learning_rate", "epochs", "seed", "adam_beta1", "adam_beta2",
                   "adam_epsilon", "normalize_weights"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(lambda_=float(lam), weights=weights, **d)


@dataclass
class FairArtifacts:
    """Fair-risk model, score profile, and per-split evaluation contexts.

    Built once per dataset and shared across every run in a sweep: the
    matchings depend only on the fair-risk scores, not on the classifier.
    """

    model: FairRiskModel
    profile: FairRiskProfile
    contexts: dict


def prepare_fairness(ds: TabularDataset) -> FairArtifacts:
    model = fit_fair_risk(ds)
    profile = build_profile(model, ds)
    contexts = {split: make_eval_context(ds, profile, split) for split in ("train", "dev", "test")}
    return FairArtifacts(model=model, profile=profile, contexts=contexts)


@dataclass
class TrainTrace:
    """Per-epoch log plus the final test evaluation."""

    epochs: list = field(default_factory=list)
    final_test: dict | None = None

    def add(self, record: dict):
        self.epochs.append(record)


@dataclass
class TrainResult:
    config: TrainConfig
    params: ModelParams
    trace: TrainTrace
    evaluations: dict        # split -> {"accuracy": ..., "metrics": {...}}
    fair: FairArtifacts


def _bce(p: np.ndarray, y: np.ndarray) -> float:
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _accuracy(p: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((p >= 0.5).astype(np.int64) == y))


def _penalty_and_grad(p, ctx: EvalContext, config: TrainConfig):
    """Weighted fairness score over active metrics and its d/dp gradient."""
    total = 0.0
    grad = np.zeros(len(p))
    parts = {}
    for spec, w in zip(METRIC_SPECS, config.weights):
        if w <= 0:
            continue
        mv, g = compute_metric(spec, p, ctx, want_grad=True)
        total += w * mv.value
        grad += w * g
        parts[spec.metric_id] = mv.value
    return total, grad, parts


def evaluate_split(params: ModelParams, ds: TabularDataset, ctx: EvalContext,
                   split: str, on_error: str = "none") -> dict:
    idx = ds.split_indices(split)
    p, _ = forward(params, ds.features[idx])
    y = ds.labels[idx]
    return {
        "accuracy": _accuracy(p, y),
        "metrics": compute_all_metrics(p, ctx, on_error=on_error),
    }


def objective(params: ModelParams, ds: TabularDataset, config: TrainConfig,
              fair: FairArtifacts) -> tuple:
    """Training-split objective: (f, mean loss, weighted fairness term).

    With λ = 0 (or all weights zero) the fairness term is not computed and
    comes back as None.
    """
    idx = ds.split_indices("train")
    value, _, parts = objective_and_grads(
        params, ds.features[idx], ds.labels[idx].astype(np.float64),
        fair.contexts["train"], config)
    return value, parts["bce"], parts["penalty"]


def gradient(params: ModelParams, ds: TabularDataset, config: TrainConfig,
             fair: FairArtifacts) -> dict:
    """Analytic gradient of the objective in the shape of ModelParams."""
    idx = ds.split_indices("train")
    _, grads, _ = objective_and_grads(
        params, ds.features[idx], ds.labels[idx].astype(np.float64),
        fair.contexts["train"], config)
    return grads


class AdamState:
    """Standard Adam (bias-corrected) over a dict of parameter arrays."""

    def __init__(self, shapes: dict, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.m = {k: np.zeros(s) for k, s in shapes.items()}
        self.v = {k: np.zeros(s) for k, s in shapes.items()}
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0


def adam_step(params: dict, grads: dict, state: AdamState, lr: float):
    """One in-place Adam update on every parameter array."""
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for k, g in grads.items():
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g
        params[k] -= lr * (state.m[k] / c1) / (np.sqrt(state.v[k] / c2) + state.eps)


def objective_and_grads(params: ModelParams, x, y, ctx: EvalContext, config: TrainConfig):
    """Objective value, parameter gradients, and the logged components."""
    p, cache = forward(params, x)
    bce = _bce(p, y)
    n = len(y)
    dp_to_z = None
    if config.lambda_ > 0 and any(w > 0 for w in config.weights):
        penalty, dpen, parts = _penalty_and_grad(p, ctx, config)
        value = bce - config.lambda_ * penalty
        dz2 = (p - y) / n * cache["mask"] - config.lambda_ * grad_logits_from_probs(cache, dpen)
    else:
        penalty, parts = None, {}
        value = bce
        dz2 = (p - y) / n * cache["mask"]
    grads = backward(params, cache, dz2)
    return value, grads, {"bce": bce, "penalty": penalty, "penalty_parts": parts}


def train(ds: TabularDataset, config: TrainConfig, fair: FairArtifacts | None = None) -> TrainResult:
    """Runs one full training job and returns params, trace, and evaluations.

    Raises NonFiniteError (with the partial trace attached) if the objective
    or any gradient stops being finite.
    """
    if fair is None:
        fair = prepare_fairness(ds)
    train_idx = ds.split_indices("train")
    x = ds.features[train_idx]
    y = ds.labels[train_idx].astype(np.float64)
    ctx = fair.contexts["train"]

    params = init_params(ds.dim, config.seed)
    pdict = params.as_dict()
    adam = AdamState({k: a.shape for k, a in pdict.items()},
                     config.adam_beta1, config.adam_beta2, config.adam_epsilon)
    trace = TrainTrace()

    for epoch in range(config.epochs):
        value, grads, parts = objective_and_grads(params, x, y, ctx, config)
        if not math.isfinite(value) or any(not np.all(np.isfinite(g)) for g in grads.values()):
            raise NonFiniteError(f"non-finite objective or gradient at epoch {epoch}", trace=trace)
        adam_step(pdict, grads, adam, config.learning_rate)

        dev = evaluate_split(params, ds, fair.contexts["dev"], "dev", on_error="none")
        record = {
            "epoch": epoch,
            "objective": value,
            "bce": parts["bce"],
            "penalty": parts["penalty"],
            "dev_accuracy": dev["accuracy"],
            "dev_metrics": dev["metrics"],
        }
        trace.add(record)

    evaluations = {
        split: evaluate_split(params, ds, fair.contexts[split], split, on_error="none")
        for split in ("train", "dev", "test")
    }
    trace.final_test = {
        "accuracy": evaluations["test"]["accuracy"],
        "metrics": evaluations["test"]["metrics"],
        "decision_threshold": 0.5,
    }
    return TrainResult(config=config, params=params, trace=trace,
                       evaluations=evaluations, fair=fair)


def jsonable_trace_record(record: dict) -> dict:
    """Rounds a trace record's floats for stable on-disk serialization."""
    def conv(v):
        if isinstance(v, float):
            return _sig12(v)
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        return v

    return {k: conv(v) for k, v in record.items()}
