"""HTTP service exposing datasets, metrics, stakeholder presets, and
long-running training/sweep jobs under /v1.

Jobs persist as JSON files under <out_root>/jobs so completed frontiers
survive restarts; result artifacts live under <out_root>/results/<job_id>.
Frontier responses are served byte-for-byte from the harness's files.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from fairforge import __version__
from fairforge.data import TabularDataset, class_distribution
from fairforge.errors import FairforgeError, PlanError
from fairforge.harness import (
    ConsensusPlan,
    StakeholderProfile,
    SweepPlan,
    _run_point,
    canonical_json,
    consensus_sweep,
    run_alpha_sweep,
    run_lambda_sweep,
    run_stakeholder_grid,
    write_sweep_artifacts,
)
from fairforge.metrics import METRIC_DESCRIPTORS, METRIC_IDS, MetricSpec
from fairforge.training import TrainConfig, prepare_fairness

log = logging.getLogger(__name__)

JOB_KINDS = ("train", "lambda_sweep", "alpha_sweep", "consensus_sweep", "stakeholder_search")

# Built-in stakeholder presets: each maps a stakeholder to its target metric
# and the lambda it is represented at, with full weight on that metric.
STAKEHOLDER_PRESETS = [
    {
        "id": "public-safety",
        "name": "Public Safety Advocates",
        "dataset": "compas",
        "target_metric": "individual.infra_marginal.eoo",
        "lambda": 1.0,
        "accuracy_tolerance_pp": 5.0,
        "description": ("Consistent, merit-based treatment: among people who truly "
                        "reoffend, similarly risky individuals should receive "
                        "equivalent predictions regardless of group."),
    },
    {
        "id": "civil-rights",
        "name": "Civil Rights Organizations",
        "dataset": "compas",
        "target_metric": "group.intersectional.outcome",
        "lambda": 3.0,
        "accuracy_tolerance_pp": 5.0,
        "description": ("Parity in outcomes across demographic groups regardless of "
                        "base rates, correcting for systemic disadvantage."),
    },
    {
        "id": "social-work",
        "name": "Social Workers",
        "dataset": "compas",
        "target_metric": "group.intersectional.eoo",
        "lambda": 3.0,
        "accuracy_tolerance_pp": 5.0,
        "description": ("Equitable access to rehabilitative resources: among people "
                        "who truly reoffend, groups should be flagged for support at "
                        "equal rates."),
    },
    {
        "id": "provider",
        "name": "Healthcare Providers",
        "dataset": "meps",
        "target_metric": "individual.infra_marginal.eoo",
        "lambda": 2.0,
        "accuracy_tolerance_pp": 5.0,
        "description": ("Patients with similar health conditions who truly need "
                        "frequent care should receive comparable predictions."),
    },
    {
        "id": "public-health",
        "name": "Public Health Officials",
        "dataset": "meps",
        "target_metric": "group.intersectional.outcome",
        "lambda": 2.0,
        "accuracy_tolerance_pp": 5.0,
        "description": ("Disadvantaged subgroups should not be under-identified for "
                        "care, even at some cost to accuracy."),
    },
    {
        "id": "patient-advocacy",
        "name": "Patient Advocacy Groups",
        "dataset": "meps",
        "target_metric": "group.intersectional.eoo",
        "lambda": 2.0,
        "accuracy_tolerance_pp": 5.0,
        "description": ("Among people who truly need care, marginalized subgroups "
                        "should be recognized at the same rate."),
    },
]


def _preset_weights(target_metric: str) -> dict:
    return {m: (1.0 if m == target_metric else 0.0) for m in METRIC_IDS}


class JobRecord(BaseModel):
    id: str
    kind: str
    state: str                    # queued -> running -> done | failed
    progress: float = 0.0
    result_ref: str | None = None
    error: str | None = None
    idempotency_key: str | None = None


class JobSubmission(BaseModel):
    kind: str
    payload: dict
    idempotency_key: str | None = None


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        self.status, self.code, self.message, self.field = status, code, message, field
        super().__init__(message)


_FIELD_TOKENS = ("weights", "weight_pairs", "lambda_grid", "alpha_grid", "lambda_fixed",
                 "lambda_candidates", "weight_candidates", "metric_a", "metric_b",
                 "seeds", "dataset", "epochs", "learning_rate", "target_metric",
                 "name", "config", "profile", "lambda", "alpha")


def _validation_error(message: str) -> ApiError:
    field = next((tok for tok in _FIELD_TOKENS if tok in message), None)
    return ApiError(400, "validation_error", message, field)


class JobStore:
    """JSON-file-per-job store with a single-writer lock and atomic writes."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, job_id: str) -> str:
        return os.path.join(self.root, f"{job_id}.json")

    def get(self, job_id: str) -> JobRecord | None:
        try:
            with open(self._path(job_id)) as fh:
                return JobRecord(**json.load(fh))
        except FileNotFoundError:
            return None

    def put(self, record: JobRecord) -> None:
        with self._lock:
            tmp = self._path(record.id) + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(record.model_dump(), fh, sort_keys=True)
            os.replace(tmp, self._path(record.id))

    def all(self) -> list:
        records = []
        for name in sorted(os.listdir(self.root)):
            if name.endswith(".json"):
                with open(os.path.join(self.root, name)) as fh:
                    records.append(JobRecord(**json.load(fh)))
        return records

    def find_by_key(self, key: str) -> JobRecord | None:
        for record in self.all():
            if record.idempotency_key == key:
                return record
        return None

    def mark_interrupted(self) -> None:
        for record in self.all():
            if record.state in ("queued", "running"):
                record.state = "failed"
                record.error = "interrupted by service restart"
                self.put(record)


class DatasetRegistry:
    """Datasets registered at startup from saved dataset containers."""

    def __init__(self):
        self.datasets: dict = {}     # name -> TabularDataset
        self._fair: dict = {}
        self._fair_lock = threading.Lock()
        self.rejected: list = []

    def register_dir(self, directory: str) -> None:
        if not directory or not os.path.isdir(directory):
            return
        for name in sorted(os.listdir(directory)):
            if not name.endswith(".json"):
                continue
            path = os.path.join(directory, name)
            try:
                ds = TabularDataset.load(path)
            except Exception as exc:
                self.rejected.append({"file": name, "reason": f"{type(exc).__name__}: {exc}"})
                log.warning("rejected dataset registration %s: %s", path, exc)
                continue
            self.datasets[ds.schema.name] = ds

    def register(self, ds: TabularDataset) -> None:
        self.datasets[ds.schema.name] = ds

    def get(self, name: str) -> TabularDataset:
        if name not in self.datasets:
            raise _validation_error(f"unknown dataset {name!r}; registered: {sorted(self.datasets)}")
        return self.datasets[name]

    def fair_for(self, name: str):
        ds = self.get(name)
        with self._fair_lock:
            if name not in self._fair:
                self._fair[name] = prepare_fairness(ds)
            return self._fair[name]

    def summaries(self) -> list:
        out = []
        for name in sorted(self.datasets):
            ds = self.datasets[name]
            dist = class_distribution(ds)
            out.append({
                "name": name,
                "rows": ds.n,
                "dim": ds.dim,
                "groups": {
                    "privileged": int(ds.privileged.sum()),
                    "unprivileged": int((~ds.privileged).sum()),
                },
                "splits": {tag: int(len(ds.split_indices(tag))) for tag in ("train", "dev", "test")},
                "class_distribution": dist.cells,
            })
        return out


def _run_job(registry: DatasetRegistry, store: JobStore, record: JobRecord,
             payload: dict, out_dir: str) -> None:
    record.state = "running"
    store.put(record)

    def progress(frac: float) -> None:
        record.progress = round(min(max(frac, 0.0), 1.0), 6)
        store.put(record)

    try:
        kind = record.kind
        if kind == "train":
            ds = registry.get(payload["dataset"])
            fair = registry.fair_for(payload["dataset"])
            config = TrainConfig.from_dict(payload.get("config", {}))
            point = _run_point(ds, fair, config, out_dir, dataset_name=payload["dataset"])
            if point.status != "ok":
                raise FairforgeError(point.error or "training failed")
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, "frontier.json"), "w") as fh:
                fh.write(canonical_json([point.to_dict()]) + "\n")
        elif kind in ("lambda_sweep", "alpha_sweep"):
            plan = SweepPlan.from_dict(payload)
            if (plan.kind == "alpha_sweep") != (kind == "alpha_sweep"):
                raise PlanError(f"plan shape is a {plan.kind}, job kind is {kind}")
            ds = registry.get(plan.dataset)
            fair = registry.fair_for(plan.dataset)
            runner = run_alpha_sweep if kind == "alpha_sweep" else run_lambda_sweep
            points = runner(ds, plan, fair, out_dir=out_dir, progress=progress)
            write_sweep_artifacts(out_dir, plan.to_dict(), points, ds)
        elif kind == "consensus_sweep":
            plan = ConsensusPlan.from_dict(payload)
            ds = registry.get(plan.dataset)
            fair = registry.fair_for(plan.dataset)
            points = consensus_sweep(ds, plan, fair, out_dir=out_dir, progress=progress)
            write_sweep_artifacts(out_dir, plan.to_dict(), points, ds)
        elif kind == "stakeholder_search":
            dataset_name = payload["dataset"]
            ds = registry.get(dataset_name)
            fair = registry.fair_for(dataset_name)
            profile = StakeholderProfile.from_dict(payload["profile"])
            points, selection = run_stakeholder_grid(
                ds, profile, fair, out_dir=out_dir,
                train_overrides=payload.get("train"),
                seeds=payload.get("seeds"), progress=progress)
            write_sweep_artifacts(out_dir, {"profile": profile.to_dict(),
                                            "dataset": dataset_name},
                                  points, ds)
            with open(os.path.join(out_dir, "selection.json"), "w") as fh:
                fh.write(canonical_json(selection.to_dict()) + "\n")
        else:
            raise PlanError(f"unknown job kind {kind!r}")
        record.state = "done"
        record.progress = 1.0
        record.result_ref = out_dir
        store.put(record)
    except Exception as exc:
        record.state = "failed"
        record.error = f"{type(exc).__name__}: {exc}"
        store.put(record)


def create_app(datasets_dir: str | None = None, out_root: str | None = None,
               workers: int = 1, registry: DatasetRegistry | None = None) -> FastAPI:
    out_root = out_root or os.environ.get("FAIRFORGE_OUT") or os.path.join(os.getcwd(), "out")
    store = JobStore(os.path.join(out_root, "jobs"))
    store.mark_interrupted()
    if registry is None:
        registry = DatasetRegistry()
        registry.register_dir(datasets_dir)
    pool = ThreadPoolExecutor(max_workers=max(1, workers))
    submit_lock = threading.Lock()

    app = FastAPI(title="fairforge", version=__version__)
    app.state.registry = registry
    app.state.store = store

    @app.exception_handler(ApiError)
    async def api_error_handler(request, exc: ApiError):
        body = {"code": exc.code, "message": exc.message}
        if exc.field:
            body["field"] = exc.field
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request, exc: RequestValidationError):
        errors = exc.errors()
        field = ".".join(str(p) for p in errors[0]["loc"] if p != "body") if errors else None
        message = errors[0]["msg"] if errors else "invalid request"
        body = {"code": "validation_error", "message": message}
        if field:
            body["field"] = field
        return JSONResponse(status_code=400, content=body)

    @app.get("/v1/datasets")
    def list_datasets():
        return registry.summaries()

    @app.get("/v1/metrics")
    def list_metrics():
        out = []
        for mid in METRIC_IDS:
            spec = MetricSpec.from_id(mid)
            desc = METRIC_DESCRIPTORS[mid]
            out.append({
                "id": mid,
                "granularity": spec.granularity,
                "stance": spec.stance,
                "regime": spec.regime,
                "name": desc["name"],
                "description": desc["description"],
            })
        return out

    @app.get("/v1/stakeholders")
    def list_stakeholders():
        out = []
        for preset in STAKEHOLDER_PRESETS:
            entry = dict(preset)
            entry["weights"] = _preset_weights(preset["target_metric"])
            out.append(entry)
        return out

    @app.post("/v1/jobs")
    def submit_job(submission: JobSubmission):
        if submission.kind not in JOB_KINDS:
            raise ApiError(400, "validation_error",
                           f"unknown job kind {submission.kind!r}; one of {list(JOB_KINDS)}",
                           field="kind")
        with submit_lock:
            if submission.idempotency_key:
                existing = store.find_by_key(submission.idempotency_key)
                if existing is not None:
                    return existing.model_dump()
            # validate the payload up front so bad jobs never enter the queue
            try:
                _validate_payload(registry, submission.kind, submission.payload)
            except ApiError:
                raise
            except (PlanError, ValueError, KeyError) as exc:
                raise _validation_error(str(exc)) from exc
            record = JobRecord(id=uuid.uuid4().hex[:12], kind=submission.kind,
                               state="queued", idempotency_key=submission.idempotency_key)
            store.put(record)
            snapshot = record.model_dump()
        out_dir = os.path.join(out_root, "results", record.id)
        pool.submit(_run_job, registry, store, record, submission.payload, out_dir)
        return snapshot

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str):
        record = store.get(job_id)
        if record is None:
            raise ApiError(404, "not_found", f"no job {job_id!r}")
        return record.model_dump()

    @app.get("/v1/jobs/{job_id}/frontier")
    def get_frontier(job_id: str):
        record = store.get(job_id)
        if record is None:
            raise ApiError(404, "not_found", f"no job {job_id!r}")
        if record.state == "failed":
            raise ApiError(409, "not_ready", f"job failed: {record.error}")
        if record.state != "done" or not record.result_ref:
            raise ApiError(409, "not_ready",
                           f"job is {record.state} at progress {record.progress:.2f}")
        path = os.path.join(record.result_ref, "frontier.json")
        if not os.path.exists(path):
            raise ApiError(404, "not_found", "job finished without a frontier artifact")
        with open(path, "rb") as fh:
            return Response(content=fh.read(), media_type="application/json")

    return app


def _validate_payload(registry: DatasetRegistry, kind: str, payload: dict) -> None:
    """Builds the domain objects once, for their validation side effects."""
    if kind == "train":
        if "dataset" not in payload:
            raise _validation_error("payload needs a dataset name")
        registry.get(payload["dataset"])
        TrainConfig.from_dict(payload.get("config", {}))
    elif kind in ("lambda_sweep", "alpha_sweep"):
        plan = SweepPlan.from_dict(payload)
        if (plan.kind == "alpha_sweep") != (kind == "alpha_sweep"):
            raise _validation_error(f"plan shape is a {plan.kind}, job kind is {kind}")
        registry.get(plan.dataset)
    elif kind == "consensus_sweep":
        plan = ConsensusPlan.from_dict(payload)
        registry.get(plan.dataset)
    elif kind == "stakeholder_search":
        if "dataset" not in payload or "profile" not in payload:
            raise _validation_error("payload needs dataset and profile")
        registry.get(payload["dataset"])
        StakeholderProfile.from_dict(payload["profile"])
