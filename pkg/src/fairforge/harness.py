"""Sweep orchestration: lambda sweeps, alpha sweeps, consensus sweeps, and
the stakeholder grid search, with deterministic on-disk result artifacts.

Every sweep writes one output directory:

    plan.json           the plan as canonical JSON
    manifest.json       dataset fingerprint, per-point config hashes, tool version
    frontier.json       JSON array of frontier points (the trade-off curve)
    runs/<hash>/        per-run trace.jsonl, summary.json, params.json

All files are free of timestamps and float noise (12 significant digits), so
re-running a plan with the same seeds reproduces them byte for byte. Points
are keyed by a hash of their canonical config; execution order never affects
output order.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fairforge import __version__
from fairforge.data import TabularDataset
from fairforge.errors import NoFeasibleCandidateError, PlanError
from fairforge.fairrisk import _sig12
from fairforge.metrics import METRIC_IDS, MetricSpec
from fairforge.training import (
    FairArtifacts,
    TrainConfig,
    jsonable_trace_record,
    prepare_fairness,
    train,
)

DEFAULT_SEARCH_LAMBDAS = [0.0, 0.5, 1.0, 2.0, 3.0]


def _round_floats(obj):
    if isinstance(obj, float):
        return _sig12(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_round_floats(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config_dict: dict) -> str:
    return hashlib.sha256(canonical_json(config_dict).encode()).hexdigest()[:16]


@dataclass
class SweepPlan:
    """A lambda sweep, or an alpha sweep when alpha_grid is given."""

    dataset: str
    lambda_grid: list
    base_weights: list | None = None
    alpha_grid: list | None = None
    metric_a: str | None = None
    metric_b: str | None = None
    seeds: list = field(default_factory=lambda: [0])
    train: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.base_weights, dict):
            unknown = set(self.base_weights) - set(METRIC_IDS)
            if unknown:
                raise PlanError(f"unknown metric ids in base_weights: {sorted(unknown)}")
            self.base_weights = [float(self.base_weights.get(m, 0.0)) for m in METRIC_IDS]
        if not self.lambda_grid:
            raise PlanError("lambda_grid must be nonempty")
        self.lambda_grid = [float(v) for v in self.lambda_grid]
        if any(v < 0 for v in self.lambda_grid):
            raise PlanError("lambda values must be nonnegative")
        if not self.seeds:
            raise PlanError("seeds must be nonempty")
        if self.alpha_grid is not None:
            self.alpha_grid = [float(a) for a in self.alpha_grid]
            if not self.alpha_grid:
                raise PlanError("alpha_grid must be nonempty")
            if any(a < 0 or a > 1 for a in self.alpha_grid):
                raise PlanError("alpha values must lie in [0, 1]")
            if not self.metric_a or not self.metric_b:
                raise PlanError("alpha sweeps need metric_a and metric_b")
            if self.metric_a == self.metric_b:
                raise PlanError("metric_a and metric_b must differ")
            MetricSpec.from_id(self.metric_a)
            MetricSpec.from_id(self.metric_b)
            if len(self.lambda_grid) != 1:
                raise PlanError("alpha sweeps fix a single lambda")
        else:
            weights = self.base_weights or []
            if len(weights) != len(METRIC_IDS):
                raise PlanError(f"base_weights must have {len(METRIC_IDS)} entries")
            if any(w < 0 for w in weights):
                raise PlanError("base_weights must be nonnegative")
            if any(v > 0 for v in self.lambda_grid) and not any(w > 0 for w in weights):
                raise PlanError("lambda sweep with positive lambda needs an active weight")
        unknown = set(self.train) - {"epochs", "learning_rate"}
        if unknown:
            raise PlanError(f"unknown train overrides: {sorted(unknown)}")

    @property
    def kind(self) -> str:
        return "alpha_sweep" if self.alpha_grid is not None else "lambda_sweep"

    def to_dict(self) -> dict:
        out = {
            "dataset": self.dataset,
            "lambda_grid": self.lambda_grid,
            "seeds": self.seeds,
        }
        if self.alpha_grid is not None:
            out.update({"alpha_grid": self.alpha_grid,
                        "metric_a": self.metric_a, "metric_b": self.metric_b})
        else:
            out["base_weights"] = self.base_weights
        if self.train:
            out["train"] = self.train
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SweepPlan":
        d = dict(d)
        allowed = {"dataset", "lambda_grid", "base_weights", "alpha_grid",
                   "metric_a", "metric_b", "seeds", "train"}
        unknown = set(d) - allowed
        if unknown:
            raise PlanError(f"unknown plan fields: {sorted(unknown)}")
        if "dataset" not in d or "lambda_grid" not in d:
            raise PlanError("plan needs dataset and lambda_grid")
        return cls(**d)


@dataclass
class ConsensusPlan:
    """Two-stakeholder weight-pair sweep at a fixed lambda."""

    dataset: str
    metric_a: str
    metric_b: str
    lambda_fixed: float
    weight_pairs: list
    seeds: list = field(default_factory=lambda: [0])
    train: dict = field(default_factory=dict)

    def __post_init__(self):
        MetricSpec.from_id(self.metric_a)
        MetricSpec.from_id(self.metric_b)
        if self.metric_a == self.metric_b:
            raise PlanError("metric_a and metric_b must differ")
        if self.lambda_fixed < 0:
            raise PlanError("lambda_fixed must be nonnegative")
        if not self.weight_pairs:
            raise PlanError("weight_pairs must be nonempty")
        pairs = []
        for pair in self.weight_pairs:
            if len(pair) != 2:
                raise PlanError(f"weight pair must have 2 entries, got {pair!r}")
            wa, wb = float(pair[0]), float(pair[1])
            if wa < 0 or wb < 0 or abs(wa + wb - 1.0) > 1e-9:
                raise PlanError(f"weight pair must be nonnegative and sum to 1, got {pair!r}")
            pairs.append([wa, wb])
        self.weight_pairs = pairs
        if not self.seeds:
            raise PlanError("seeds must be nonempty")
        unknown = set(self.train) - {"epochs", "learning_rate"}
        if unknown:
            raise PlanError(f"unknown train overrides: {sorted(unknown)}")

    def to_dict(self) -> dict:
        out = {
            "dataset": self.dataset,
            "metric_a": self.metric_a,
            "metric_b": self.metric_b,
            "lambda_fixed": self.lambda_fixed,
            "weight_pairs": self.weight_pairs,
            "seeds": self.seeds,
        }
        if self.train:
            out["train"] = self.train
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ConsensusPlan":
        d = dict(d)
        allowed = {"dataset", "metric_a", "metric_b", "lambda_fixed",
                   "weight_pairs", "seeds", "train"}
        unknown = set(d) - allowed
        if unknown:
            raise PlanError(f"unknown plan fields: {sorted(unknown)}")
        missing = {"dataset", "metric_a", "metric_b", "lambda_fixed", "weight_pairs"} - set(d)
        if missing:
            raise PlanError(f"plan missing fields: {sorted(missing)}")
        return cls(**d)


@dataclass
class StakeholderProfile:
    """A stakeholder's target metric, accuracy tolerance, and search grid."""

    name: str
    target_metric: str
    accuracy_tolerance_pp: float = 5.0
    lambda_candidates: list = field(default_factory=lambda: list(DEFAULT_SEARCH_LAMBDAS))
    weight_candidates: list = field(default_factory=list)

    def __post_init__(self):
        MetricSpec.from_id(self.target_metric)
        if self.accuracy_tolerance_pp < 0:
            raise PlanError("accuracy tolerance must be nonnegative")
        if not self.lambda_candidates:
            raise PlanError("lambda_candidates must be nonempty")
        self.lambda_candidates = [float(v) for v in self.lambda_candidates]
        if any(v < 0 for v in self.lambda_candidates):
            raise PlanError("lambda candidates must be nonnegative")
        if not self.weight_candidates:
            weights = [0.0] * len(METRIC_IDS)
            weights[METRIC_IDS.index(self.target_metric)] = 1.0
            self.weight_candidates = [weights]
        for w in self.weight_candidates:
            if len(w) != len(METRIC_IDS):
                raise PlanError(f"weight candidate must have {len(METRIC_IDS)} entries")
            if any(x < 0 for x in w):
                raise PlanError("weight candidates must be nonnegative")
            if abs(sum(w) - 1.0) > 1e-9:
                raise PlanError("weight candidates must sum to 1")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "target_metric": self.target_metric,
            "accuracy_tolerance_pp": self.accuracy_tolerance_pp,
            "lambda_candidates": self.lambda_candidates,
            "weight_candidates": self.weight_candidates,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StakeholderProfile":
        d = dict(d)
        allowed = {"name", "target_metric", "accuracy_tolerance_pp",
                   "lambda_candidates", "weight_candidates"}
        unknown = set(d) - allowed
        if unknown:
            raise PlanError(f"unknown profile fields: {sorted(unknown)}")
        if "name" not in d or "target_metric" not in d:
            raise PlanError("profile needs name and target_metric")
        return cls(**d)


@dataclass
class FrontierPoint:
    """One trained configuration's position in the trade-off space."""

    config: dict                 # lambda, weights by id, seed, epochs, learning_rate
    config_hash: str
    split: str = "test"
    status: str = "ok"
    test_accuracy: float | None = None
    metric_values: dict | None = None
    dev_accuracy: float | None = None
    dev_metric_values: dict | None = None
    error: str | None = None
    label: str | None = None     # consensus presentation label
    aggregate: bool = False
    seeds: list | None = None    # seeds behind an aggregate point

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "config_hash": self.config_hash,
            "split": self.split,
            "status": self.status,
            "test_accuracy": self.test_accuracy,
            "metric_values": self.metric_values,
            "dev_accuracy": self.dev_accuracy,
            "dev_metric_values": self.dev_metric_values,
            "error": self.error,
        }
        if self.label is not None:
            out["label"] = self.label
        if self.aggregate:
            out["aggregate"] = True
            out["seeds"] = self.seeds
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FrontierPoint":
        return cls(
            config=d["config"],
            config_hash=d.get("config_hash", config_hash(d["config"])),
            split=d.get("split", "test"),
            status=d.get("status", "ok"),
            test_accuracy=d.get("test_accuracy"),
            metric_values=d.get("metric_values"),
            dev_accuracy=d.get("dev_accuracy"),
            dev_metric_values=d.get("dev_metric_values"),
            error=d.get("error"),
            label=d.get("label"),
            aggregate=bool(d.get("aggregate", False)),
            seeds=d.get("seeds"),
        )


def _build_config(lam: float, weights: list, seed: int, train_overrides: dict) -> TrainConfig:
    return TrainConfig(lambda_=lam, weights=weights, seed=seed, **train_overrides)


def _run_point(ds: TabularDataset, fair: FairArtifacts, config: TrainConfig,
               out_dir: str | None, label: str | None = None,
               dataset_name: str | None = None) -> FrontierPoint:
    summary_config = config.to_dict()
    chash = config_hash(summary_config)
    try:
        result = train(ds, config, fair)
    except Exception as exc:  # per-point isolation: a sweep survives bad points
        return FrontierPoint(config=summary_config, config_hash=chash,
                             status="failed", error=f"{type(exc).__name__}: {exc}",
                             label=label)
    point = FrontierPoint(
        config=summary_config,
        config_hash=chash,
        split="test",
        test_accuracy=result.evaluations["test"]["accuracy"],
        metric_values=result.evaluations["test"]["metrics"],
        dev_accuracy=result.evaluations["dev"]["accuracy"],
        dev_metric_values=result.evaluations["dev"]["metrics"],
        label=label,
    )
    if out_dir is not None:
        run_dir = os.path.join(out_dir, "runs", chash)
        os.makedirs(run_dir, exist_ok=True)
        with open(os.path.join(run_dir, "trace.jsonl"), "w") as fh:
            for record in result.trace.epochs:
                fh.write(canonical_json(jsonable_trace_record(record)) + "\n")
        summary = {
            "kind": "fairforge.run_summary",
            "version": 1,
            "dataset": dataset_name or ds.schema.name,
            "config": summary_config,
            "config_hash": chash,
            "decision_threshold": 0.5,
            "evaluations": result.evaluations,
            "fair_risk": {
                "converged": result.fair.model.converged,
                "shift_constant": result.fair.profile.shift_constant,
            },
        }
        with open(os.path.join(run_dir, "summary.json"), "w") as fh:
            fh.write(canonical_json(summary) + "\n")
        params = {"kind": "fairforge.model_params", "version": 1}
        params.update(result.params.to_jsonable())
        with open(os.path.join(run_dir, "params.json"), "w") as fh:
            fh.write(canonical_json(params) + "\n")
    return point


def _prewarm(fair: FairArtifacts, metric_ids) -> None:
    """Builds every matching a sweep will need before workers share contexts."""
    for ctx in fair.contexts.values():
        for mid in metric_ids:
            spec = MetricSpec.from_id(mid)
            if spec.uses_matching:
                ctx.pairs(spec.matching_axis, spec.regime)


def _execute(ds, fair, jobs, tasks, out_dir, dataset_name, progress=None):
    """Runs (key, config, label) tasks on a bounded pool; returns {key: point}.

    progress, if given, is called with the completed fraction after each task.
    """
    results = {}
    total = len(tasks)
    if jobs <= 1:
        for key, config, label in tasks:
            results[key] = _run_point(ds, fair, config, out_dir, label, dataset_name)
            if progress is not None:
                progress(len(results) / total)
        return results
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {key: pool.submit(_run_point, ds, fair, config, out_dir, label, dataset_name)
                   for key, config, label in tasks}
        for key, fut in futures.items():
            results[key] = fut.result()
            if progress is not None:
                progress(len(results) / total)
    return results


def _aggregate_points(points: list, group_key) -> list:
    """Mean-aggregates multi-seed points sharing a grid position."""
    groups: dict = {}
    for pt in points:
        groups.setdefault(group_key(pt), []).append(pt)
    aggregates = []
    for key in sorted(groups):
        pts = [p for p in groups[key] if p.status == "ok"]
        if len(pts) < 2:
            continue

        def mean(vals):
            return sum(vals) / len(vals)

        cfg = dict(pts[0].config)
        cfg["seed"] = None
        metric_means = {
            m: (mean([p.metric_values[m] for p in pts])
                if all(p.metric_values.get(m) is not None for p in pts) else None)
            for m in METRIC_IDS
        }
        dev_metric_means = {
            m: (mean([p.dev_metric_values[m] for p in pts])
                if all(p.dev_metric_values.get(m) is not None for p in pts) else None)
            for m in METRIC_IDS
        }
        aggregates.append(FrontierPoint(
            config=cfg,
            config_hash=config_hash({"aggregate_of": sorted(p.config_hash for p in pts)}),
            test_accuracy=mean([p.test_accuracy for p in pts]),
            metric_values=metric_means,
            dev_accuracy=mean([p.dev_accuracy for p in pts]),
            dev_metric_values=dev_metric_means,
            label=pts[0].label,
            aggregate=True,
            seeds=sorted(p.config["seed"] for p in pts),
        ))
    return aggregates


def run_lambda_sweep(ds: TabularDataset, plan: SweepPlan,
                     fair: FairArtifacts | None = None,
                     out_dir: str | None = None, jobs: int = 1,
                     progress=None) -> list:
    """One run per (lambda, seed) at fixed weights; the lambda = 0 typical
    model is always included."""
    if plan.alpha_grid is not None:
        raise PlanError("plan has alpha_grid; use run_alpha_sweep")
    if fair is None:
        fair = prepare_fairness(ds)
    grid = sorted(set(plan.lambda_grid) | {0.0})
    active = [m for m, w in zip(METRIC_IDS, plan.base_weights) if w > 0]
    _prewarm(fair, active)

    tasks = []
    for lam in grid:
        for seed in plan.seeds:
            config = _build_config(lam, plan.base_weights, seed, plan.train)
            tasks.append(((lam, seed), config, None))
    results = _execute(ds, fair, jobs, tasks, out_dir, plan.dataset, progress)
    points = [results[(lam, seed)] for lam in grid for seed in plan.seeds]
    points += _aggregate_points(points, lambda p: p.config["lambda"])
    return points


def run_alpha_sweep(ds: TabularDataset, plan: SweepPlan,
                    fair: FairArtifacts | None = None,
                    out_dir: str | None = None, jobs: int = 1,
                    progress=None) -> list:
    """One run per alpha with weights (alpha on metric_a, 1 - alpha on
    metric_b, zero elsewhere) at the plan's single fixed lambda."""
    if plan.alpha_grid is None:
        raise PlanError("plan has no alpha_grid; use run_lambda_sweep")
    if fair is None:
        fair = prepare_fairness(ds)
    _prewarm(fair, [plan.metric_a, plan.metric_b])
    lam = plan.lambda_grid[0]
    ia, ib = METRIC_IDS.index(plan.metric_a), METRIC_IDS.index(plan.metric_b)

    tasks = []
    for alpha in plan.alpha_grid:
        weights = [0.0] * len(METRIC_IDS)
        weights[ia] = alpha
        weights[ib] = 1.0 - alpha
        for seed in plan.seeds:
            config = _build_config(lam, weights, seed, plan.train)
            tasks.append(((alpha, seed), config, None))
    results = _execute(ds, fair, jobs, tasks, out_dir, plan.dataset, progress)
    points = [results[(alpha, seed)] for alpha in plan.alpha_grid for seed in plan.seeds]
    points += _aggregate_points(
        points, lambda p: p.config["weights"][plan.metric_a])
    return points


def consensus_sweep(ds: TabularDataset, plan: ConsensusPlan,
                    fair: FairArtifacts | None = None,
                    out_dir: str | None = None, jobs: int = 1,
                    progress=None) -> list:
    """Weight-pair sweep between two stakeholders' metrics at fixed lambda.

    Each point is labeled a_dominant / balanced / b_dominant by which side
    of the pair carries more weight.
    """
    if fair is None:
        fair = prepare_fairness(ds)
    _prewarm(fair, [plan.metric_a, plan.metric_b])
    ia, ib = METRIC_IDS.index(plan.metric_a), METRIC_IDS.index(plan.metric_b)

    tasks = []
    for wa, wb in plan.weight_pairs:
        weights = [0.0] * len(METRIC_IDS)
        weights[ia] = wa
        weights[ib] = wb
        label = "a_dominant" if wa > wb else ("b_dominant" if wb > wa else "balanced")
        for seed in plan.seeds:
            config = _build_config(plan.lambda_fixed, weights, seed, plan.train)
            tasks.append(((wa, seed), config, label))
    results = _execute(ds, fair, jobs, tasks, out_dir, plan.dataset, progress)
    points = [results[(wa, seed)] for wa, _ in plan.weight_pairs for seed in plan.seeds]
    points += _aggregate_points(points, lambda p: p.config["weights"][plan.metric_a])
    return points


def stakeholder_search(profile: StakeholderProfile, baseline: FrontierPoint,
                       candidates: list) -> FrontierPoint:
    """Feasible argmax of the profile's target metric on the dev split.

    Feasible means dev accuracy within accuracy_tolerance_pp of the lambda = 0
    baseline's dev accuracy. Ties break by higher dev accuracy, then lower
    lambda, then input order.
    """
    if baseline.config["lambda"] != 0.0:
        raise PlanError("baseline must be the lambda = 0 typical model")
    if baseline.dev_accuracy is None:
        raise PlanError("baseline lacks a dev-split evaluation")
    floor = baseline.dev_accuracy - profile.accuracy_tolerance_pp / 100.0

    best = None
    best_key = None
    for idx, cand in enumerate(candidates):
        if cand.status != "ok" or cand.aggregate:
            continue
        if cand.dev_accuracy is None or cand.dev_metric_values is None:
            continue
        value = cand.dev_metric_values.get(profile.target_metric)
        if value is None:
            continue
        if cand.dev_accuracy < floor:
            continue
        key = (-value, -cand.dev_accuracy, cand.config["lambda"], idx)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    if best is None:
        raise NoFeasibleCandidateError(
            f"no candidate keeps dev accuracy within {profile.accuracy_tolerance_pp} pp "
            f"of the baseline ({baseline.dev_accuracy:.4f})"
        )
    return best


def select_from_frontier(profile: StakeholderProfile, points: list) -> FrontierPoint:
    """Applies stakeholder_search to a saved frontier: the lambda = 0 point
    (lowest seed if several) is the baseline; every ok point is a candidate."""
    baselines = [p for p in points
                 if p.status == "ok" and not p.aggregate and p.config["lambda"] == 0.0]
    if not baselines:
        raise PlanError("frontier has no lambda = 0 baseline point")
    baseline = min(baselines, key=lambda p: p.config["seed"])
    return stakeholder_search(profile, baseline, points)


def run_stakeholder_grid(ds: TabularDataset, profile: StakeholderProfile,
                         fair: FairArtifacts | None = None,
                         out_dir: str | None = None, jobs: int = 1,
                         train_overrides: dict | None = None,
                         seeds: list | None = None, progress=None) -> tuple:
    """Trains the profile's lambda x weight grid and selects the winner.

    Returns (points, selection). The lambda = 0 baseline is always run.
    """
    if fair is None:
        fair = prepare_fairness(ds)
    train_overrides = train_overrides or {}
    seeds = seeds or [0]
    _prewarm(fair, [m for w in profile.weight_candidates
                    for m, x in zip(METRIC_IDS, w) if x > 0])

    lambdas = sorted(set(profile.lambda_candidates) | {0.0})
    tasks = []
    for lam in lambdas:
        weight_lists = profile.weight_candidates if lam > 0 else [profile.weight_candidates[0]]
        for wi, weights in enumerate(weight_lists):
            for seed in seeds:
                config = _build_config(lam, weights, seed, train_overrides)
                tasks.append(((lam, wi, seed), config, None))
    results = _execute(ds, fair, jobs, tasks, out_dir, ds.schema.name, progress)
    points = [results[key] for key in sorted(results)]
    selection = select_from_frontier(profile, points)
    return points, selection


def write_sweep_artifacts(out_dir: str, plan_dict: dict, points: list,
                          dataset: TabularDataset) -> None:
    """Writes plan.json, frontier.json, and manifest.json for a finished sweep.

    Nothing here depends on invocation context or wall time, so reruns of the
    same plan on the same dataset produce byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    plan_json = canonical_json(plan_dict)
    with open(os.path.join(out_dir, "plan.json"), "w") as fh:
        fh.write(plan_json + "\n")
    frontier = [p.to_dict() for p in points]
    with open(os.path.join(out_dir, "frontier.json"), "w") as fh:
        fh.write(canonical_json(frontier) + "\n")
    dataset_json = dataset.to_json()
    manifest = {
        "kind": "fairforge.sweep_manifest",
        "version": 1,
        "tool_version": __version__,
        "plan_sha256": hashlib.sha256(plan_json.encode()).hexdigest(),
        "dataset": {
            "name": dataset.schema.name,
            "sha256": hashlib.sha256(dataset_json.encode()).hexdigest(),
            "rows": dataset.n,
            "dim": dataset.dim,
        },
        "points": [
            {"config_hash": p.config_hash, "lambda": p.config["lambda"],
             "seed": p.config["seed"], "status": p.status,
             "aggregate": p.aggregate}
            for p in points
        ],
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(canonical_json(manifest) + "\n")


def load_frontier(path: str) -> list:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise PlanError(f"{path} is not a frontier array")
    return [FrontierPoint.from_dict(d) for d in data]
