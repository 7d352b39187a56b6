"""Command-line driver.

Exit codes: 0 success, 1 some models failed during ``run``, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import hydraulics
from .data_model import generate_synthetic, save_csv
from .errors import WeirflowError
from .experiment import ALL_MODELS, STRATEGIES, ExperimentConfig, emit_reports, run_experiment
from .metrics import KINDS, compute_report, log_report

SEED_ENV = "WEIRFLOW_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weirflow", description="Discharge-coefficient prediction for streamlined weirs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic dataset CSV")
    gen.add_argument("--n", type=int, default=120)
    gen.add_argument("--mode", choices=("bagheri", "linear"), default="bagheri")
    gen.add_argument("--noise-sd", type=float, default=0.01)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", required=True)

    run = sub.add_parser("run", help="cross-validate models and write reports")
    run.add_argument("--config", help="JSON file with experiment settings")
    run.add_argument("--data", help="dataset CSV (default: synthetic bagheri data)")
    run.add_argument("--models", help=f"comma-separated subset of {','.join(ALL_MODELS)}")
    run.add_argument("--folds", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--epochs", type=int)
    run.add_argument("--hybrid-strategy", choices=STRATEGIES)
    run.add_argument("--in-sample", action="store_true", default=None, help="also write in-sample YY files")
    run.add_argument("--single-thread", action="store_true", default=None, help="deterministic sequential mode (default)")
    run.add_argument("--out")

    met = sub.add_parser("metrics", help="score a prediction column against a target column")
    met.add_argument("--file", required=True)
    met.add_argument("--true-col", required=True)
    met.add_argument("--pred-col", required=True)

    base = sub.add_parser("baseline", help="evaluate a hydraulic formula")
    base.add_argument("--eq", required=True, choices=("eq1", "bagheri", "carollo", "stage"))
    base.add_argument("--params", required=True, help="comma-separated key=value pairs")
    return parser


def _parse_params(text: str) -> dict[str, float]:
    params = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} is not key=value")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"parameter {key!r} has non-numeric value {value!r}") from None
    return params


def _take(params: dict, eq: str, required: tuple[str, ...], optional: dict | None = None) -> dict:
    optional = optional or {}
    unknown = set(params) - set(required) - set(optional)
    if unknown:
        raise UsageError(f"{eq}: unexpected parameter {sorted(unknown)[0]!r}")
    missing = [k for k in required if k not in params]
    if missing:
        raise UsageError(f"{eq}: missing parameter {missing[0]!r}")
    return {**optional, **params}


def evaluate_baseline(eq: str, params: dict[str, float]) -> tuple[str, float]:
    """Dispatch a ``baseline`` request; returns (label, value)."""
    g = {"g": hydraulics.G}
    if eq == "bagheri":
        p = _take(params, eq, ("lambda", "h1", "L", "W"))
        return "Cd", hydraulics.cd_bagheri(p["lambda"], p["h1"], p["L"], p["W"])
    if eq == "carollo":
        p = _take(params, eq, ("h1", "W", "L", "W1"))
        return "Cd", hydraulics.cd_carollo(p["h1"], p["W"], p["L"], p["W1"])
    if eq == "stage":
        if "Q" in params:
            p = _take(params, eq, ("Q", "b", "W"), g)
            return "A", hydraulics.stage_variable_A(p["Q"], p["b"], p["W"], p["g"])
        p = _take(params, eq, ("h1", "W", "L", "W1"))
        return "A", hydraulics.stage_discharge_A(p["h1"], p["W"], p["L"], p["W1"])
    # eq1: head from H1 directly or from (h1, v); solve for whichever of Q / cd is absent
    head_keys = ("H1",) if "H1" in params else ("h1",)
    opt = {**g, "v": 0.0} if head_keys == ("h1",) else g
    if "cd" in params:
        p = _take(params, eq, ("cd", "B") + head_keys, opt)
        H1 = p["H1"] if "H1" in p else hydraulics.total_head(p["h1"], p["v"], p["g"])
        return "Q", hydraulics.discharge_from_cd(p["cd"], p["B"], H1, p["g"])
    if "Q" in params:
        p = _take(params, eq, ("Q", "B") + head_keys, opt)
        H1 = p["H1"] if "H1" in p else hydraulics.total_head(p["h1"], p["v"], p["g"])
        return "Cd", hydraulics.cd_from_discharge(p["Q"], p["B"], H1, p["g"])
    raise UsageError("eq1: give either cd or Q")


def _read_columns(path: str, true_col: str, pred_col: str):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fieldnames = reader.fieldnames or []
            for col in (true_col, pred_col):
                if col not in fieldnames:
                    raise UsageError(f"{path}: no column {col!r}")
            y, yhat = [], []
            for lineno, row in enumerate(reader, start=2):
                try:
                    y.append(float(row[true_col]))
                    yhat.append(float(row[pred_col]))
                except (TypeError, ValueError):
                    raise UsageError(f"{path}: row {lineno} has a non-numeric value") from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return np.array(y), np.array(yhat)


def _cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    dataset = generate_synthetic(args.n, args.mode, args.noise_sd, seed)
    save_csv(dataset, args.out)
    print(f"wrote {len(dataset)} samples ({args.mode}, noise_sd={args.noise_sd}, seed={seed}) to {args.out}")
    return 0


def _cmd_run(args) -> int:
    settings = {}
    if args.config:
        try:
            settings = ExperimentConfig.read_mapping(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
    overrides = {
        "data": args.data,
        "models": args.models,
        "folds": args.folds,
        "seed": args.seed,
        "epochs": args.epochs,
        "hybrid_strategy": args.hybrid_strategy,
        "in_sample": args.in_sample,
        "single_thread": args.single_thread,
        "out": args.out,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if "seed" not in settings:
        settings["seed"] = _default_seed()
    if args.data:
        settings["synthetic"] = None
    config = ExperimentConfig.from_mapping(settings)

    print("effective config:")
    print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
    dataset = config.load_dataset()
    result = run_experiment(config, dataset)
    emit_reports(result, config.out)

    print(f"\n{'model':<10} {'status':<7} {'seconds':>10} " + " ".join(f"{k:>10}" for k in KINDS))
    for m in config.models:
        if m in result.failures:
            print(f"{m:<10} {'FAILED':<7} {'':>10} {result.failures[m]}")
            continue
        vals = " ".join(f"{v:>10.4g}" for v in result.pooled[m].values())
        print(f"{m:<10} {'ok':<7} {result.timing[m]:>10.3f} {vals}")
    print(f"reports written to {config.out}")
    return 1 if result.failures else 0


def _cmd_metrics(args) -> int:
    y, yhat = _read_columns(args.file, args.true_col, args.pred_col)
    report = compute_report(y, yhat)
    logs = log_report(report)
    for kind, value, lg in zip(KINDS, report.values(), logs):
        print(f"{kind:<6} {value:.10g}  (log10 {lg:.6g})")
    print(f"clamped predictions: {report.clamped_count}")
    print()
    names = [k.lower() for k in KINDS]
    print(",".join(names + [f"log10_{k}" for k in names]))
    print(",".join(f"{v:.17g}" for v in (*report.values(), *logs)))
    return 0


def _cmd_baseline(args) -> int:
    label, value = evaluate_baseline(args.eq, _parse_params(args.params))
    print(f"{label} = {value:.10g}")
    return 0


COMMANDS = {"generate": _cmd_generate, "run": _cmd_run, "metrics": _cmd_metrics, "baseline": _cmd_baseline}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"weirflow: error: {exc}", file=sys.stderr)
        return 2
    except (WeirflowError, ValueError, OSError) as exc:
        print(f"weirflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
