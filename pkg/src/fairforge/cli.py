"""Command-line client for the fairness training toolkit.

Thin wrapper over the library: every subcommand parses its inputs, calls the
same functions the HTTP service uses, and writes the same artifact layout, so
a CLI run and a library run of the same plan produce identical bytes.

Exit codes: 0 success, 1 invalid input (schema, plan, config, arguments),
2 runtime failure (non-finite training, no feasible candidate, I/O).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import sys

from fairforge import __version__
from fairforge.data import DatasetSchema, TabularDataset, class_distribution, load_dataset
from fairforge.errors import (
    EmptyGroupError,
    FairforgeError,
    MissingColumnError,
    NonBinaryLabelError,
    PlanError,
    ShapeMismatchError,
)
from fairforge.harness import (
    ConsensusPlan,
    StakeholderProfile,
    SweepPlan,
    _run_point,
    canonical_json,
    consensus_sweep,
    load_frontier,
    run_alpha_sweep,
    run_lambda_sweep,
    run_stakeholder_grid,
    select_from_frontier,
    write_sweep_artifacts,
)
from fairforge.metrics import METRIC_IDS
from fairforge.training import TrainConfig, prepare_fairness

# Input problems the user can fix exit 1; anything else that goes wrong
# mid-run exits 2.
VALIDATION_ERRORS = (
    PlanError, MissingColumnError, NonBinaryLabelError, EmptyGroupError,
    ShapeMismatchError, ValueError, KeyError, TypeError,
    FileNotFoundError, IsADirectoryError, json.JSONDecodeError,
)


def _out_root() -> str:
    return os.environ.get("FAIRFORGE_OUT") or os.path.join(os.getcwd(), "out")


def _resolve_out(arg_out: str | None, subcommand: str) -> str:
    return arg_out or os.path.join(_out_root(), subcommand)


def _read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_ds(path: str) -> TabularDataset:
    return TabularDataset.load(path)


def cmd_ingest(args) -> int:
    schema = DatasetSchema.from_json(args.schema)
    ds = load_dataset(args.csv, schema, split_seed=args.split_seed,
                      row_limit=args.row_limit)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)) or ".", exist_ok=True)
    ds.save(args.out)
    dist = class_distribution(ds)
    print(f"ingested {ds.schema.name}: {ds.n} rows, {ds.dim} features -> {args.out}")
    for cell in dist.cells:
        print(f"  {cell['group']:>12} label={cell['label']}: "
              f"{cell['count']} ({cell['proportion']:.3f})")
    if dist.missing_groups:
        print(f"  warning: groups never observed: {dist.missing_groups}")
    return 0


def cmd_train(args) -> int:
    ds = _load_ds(args.dataset)
    config = TrainConfig.from_dict(_read_json(args.config) if args.config else {})
    out_dir = _resolve_out(args.out, "train")
    fair = prepare_fairness(ds)
    point = _run_point(ds, fair, config, out_dir, dataset_name=ds.schema.name)
    write_sweep_artifacts(out_dir, {"kind": "train", "dataset": ds.schema.name,
                                    "config": config.to_dict()}, [point], ds)
    if point.status != "ok":
        raise FairforgeError(point.error or "training failed")
    print(f"trained {ds.schema.name} lambda={config.lambda_} -> {out_dir}")
    print(f"  test accuracy {point.test_accuracy:.4f}")
    for mid in METRIC_IDS:
        value = point.metric_values.get(mid)
        print(f"  {mid}: {'n/a' if value is None else f'{value:.4f}'}")
    return 0


def cmd_sweep(args) -> int:
    ds = _load_ds(args.dataset)
    plan = SweepPlan.from_dict(_read_json(args.plan))
    if plan.dataset != ds.schema.name:
        raise PlanError(f"plan is for dataset {plan.dataset!r}, "
                        f"container holds {ds.schema.name!r}")
    out_dir = _resolve_out(args.out, "sweep")
    fair = prepare_fairness(ds)
    runner = run_alpha_sweep if plan.kind == "alpha_sweep" else run_lambda_sweep
    points = runner(ds, plan, fair, out_dir=out_dir, jobs=args.jobs)
    write_sweep_artifacts(out_dir, plan.to_dict(), points, ds)
    ok = sum(1 for p in points if p.status == "ok")
    print(f"{plan.kind} on {ds.schema.name}: {ok}/{len(points)} points ok -> {out_dir}")
    return 0 if ok else 2


def cmd_consensus(args) -> int:
    ds = _load_ds(args.dataset)
    plan = ConsensusPlan.from_dict(_read_json(args.plan))
    if plan.dataset != ds.schema.name:
        raise PlanError(f"plan is for dataset {plan.dataset!r}, "
                        f"container holds {ds.schema.name!r}")
    out_dir = _resolve_out(args.out, "consensus")
    fair = prepare_fairness(ds)
    points = consensus_sweep(ds, plan, fair, out_dir=out_dir, jobs=args.jobs)
    write_sweep_artifacts(out_dir, plan.to_dict(), points, ds)
    ok = sum(1 for p in points if p.status == "ok")
    print(f"consensus_sweep on {ds.schema.name}: {ok}/{len(points)} points ok -> {out_dir}")
    return 0 if ok else 2


def cmd_search(args) -> int:
    profile = StakeholderProfile.from_dict(_read_json(args.profile))
    out_dir = _resolve_out(args.out, "search")
    if args.frontier:
        points = load_frontier(args.frontier)
        selection = select_from_frontier(profile, points)
    else:
        if not args.dataset:
            raise PlanError("search needs --dataset unless --frontier is given")
        ds = _load_ds(args.dataset)
        fair = prepare_fairness(ds)
        train_overrides = _read_json(args.train) if args.train else None
        points, selection = run_stakeholder_grid(
            ds, profile, fair, out_dir=out_dir, jobs=args.jobs,
            train_overrides=train_overrides, seeds=args.seeds)
        write_sweep_artifacts(out_dir, {"profile": profile.to_dict(),
                                        "dataset": ds.schema.name}, points, ds)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "selection.json"), "w") as fh:
        fh.write(canonical_json(selection.to_dict()) + "\n")
    value = selection.dev_metric_values[profile.target_metric]
    print(f"selected for {profile.name}: lambda={selection.config['lambda']} "
          f"config={selection.config_hash}")
    print(f"  dev {profile.target_metric}={value:.4f} "
          f"dev accuracy={selection.dev_accuracy:.4f} "
          f"test accuracy={selection.test_accuracy:.4f}")
    return 0


CSV_BASE_FIELDS = ["config_hash", "status", "label", "aggregate", "seeds",
                   "lambda", "seed", "test_accuracy", "dev_accuracy"]


def cmd_export(args) -> int:
    src = args.frontier
    if os.path.isdir(src):
        src = os.path.join(src, "frontier.json")
    points = load_frontier(src)   # validates shape before copying bytes
    out_dir = _resolve_out(args.out, "export")
    os.makedirs(out_dir, exist_ok=True)
    shutil.copyfile(src, os.path.join(out_dir, "frontier.json"))

    fields = CSV_BASE_FIELDS + [f"test.{m}" for m in METRIC_IDS] + [f"dev.{m}" for m in METRIC_IDS]
    with open(os.path.join(out_dir, "frontier.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for p in points:
            row = {
                "config_hash": p.config_hash,
                "status": p.status,
                "label": p.label or "",
                "aggregate": int(p.aggregate),
                "seeds": ";".join(str(s) for s in p.seeds) if p.seeds else "",
                "lambda": p.config.get("lambda"),
                "seed": p.config.get("seed"),
                "test_accuracy": p.test_accuracy,
                "dev_accuracy": p.dev_accuracy,
            }
            for m in METRIC_IDS:
                row[f"test.{m}"] = (p.metric_values or {}).get(m)
                row[f"dev.{m}"] = (p.dev_metric_values or {}).get(m)
            writer.writerow(row)
    print(f"exported {len(points)} points -> {out_dir}/frontier.json, frontier.csv")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from fairforge.service import create_app

    app = create_app(datasets_dir=args.datasets, out_root=args.out or _out_root(),
                     workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairforge",
        description="Train classifiers with matched-pair and group fairness "
                    "penalties, sweep trade-off frontiers, and serve results.",
    )
    parser.add_argument("--version", action="version", version=f"fairforge {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--error-json", default=None, metavar="PATH",
                        help="also write any fatal error as JSON to PATH")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=lambda **kw: argparse.ArgumentParser(
                                    parents=[common], **kw))

    p = sub.add_parser("ingest", help="load a CSV + schema into a dataset container")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True, help="dataset schema JSON")
    p.add_argument("--split-seed", type=int, default=11)
    p.add_argument("--row-limit", type=int, default=None,
                   help="subsample this many rows for fast qualitative runs")
    p.add_argument("--out", required=True, help="output dataset container path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a single model configuration")
    p.add_argument("--dataset", required=True, help="dataset container JSON")
    p.add_argument("--config", default=None, help="train config JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run a lambda or alpha sweep plan")
    p.add_argument("--dataset", required=True)
    p.add_argument("--plan", required=True, help="sweep plan JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("consensus", help="run a two-stakeholder weight-pair sweep")
    p.add_argument("--dataset", required=True)
    p.add_argument("--plan", required=True, help="consensus plan JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("search", help="pick a stakeholder's best feasible model")
    p.add_argument("--profile", required=True, help="stakeholder profile JSON")
    p.add_argument("--dataset", default=None, help="dataset container (to train the grid)")
    p.add_argument("--frontier", default=None, help="reuse a saved frontier.json instead")
    p.add_argument("--train", default=None, help="JSON of train overrides (epochs, learning_rate)")
    p.add_argument("--seeds", type=int, nargs="+", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("export", help="export a frontier as JSON + CSV")
    p.add_argument("--frontier", required=True, help="frontier.json or its directory")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--datasets", default=None, help="directory of dataset containers")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output root (default FAIRFORGE_OUT or ./out)")
    p.set_defaults(func=cmd_serve)

    return parser


def _fail(args_error_json: str | None, exc: Exception, code: int) -> int:
    message = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
    if args_error_json:
        with open(args_error_json, "w") as fh:
            json.dump({"code": "validation_error" if code == 1 else "runtime_error",
                       "type": type(exc).__name__, "message": message}, fh)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # argparse exits 2 on bad usage; that is a validation error
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        return _fail(args.error_json, exc, 1)
    except Exception as exc:
        return _fail(args.error_json, exc, 2)


if __name__ == "__main__":
    sys.exit(main())
