"""Command-line front end: generate, predict, evaluate, sweep, baselines."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import yaml

from .config import Config, load_config, predictor_from_dict, validate_grid
from .errors import ConfigError, IncompleteTraceError, TraceFormatError, UndefinedMetricError
from .metrics import MetricsReport, evaluate
from .predictor import PredictionTrace, apply_trace, load_trace, predict_all, require_complete, write_trace
from .scenario import build_dataset, read_dataset, validation, write_dataset
from .scheduler import GuardConfig, Policy, build_timeline, plan_guard
from .sweep import BASELINE_COLUMNS, SWEEP_COLUMNS, run_baselines, run_sweep, write_rows

log = logging.getLogger("coexist")


def _config(args) -> Config:
    return load_config(args.config) if getattr(args, "config", None) else Config()


def _read_dataset(path):
    try:
        return read_dataset(path)
    except OSError as e:
        raise OSError(f"cannot read dataset {path}: {e.strerror}") from e


def _read_trace(path) -> PredictionTrace:
    try:
        return load_trace(path)
    except OSError as e:
        raise OSError(f"cannot read trace {path}: {e.strerror}") from e


def _eval_pairs(dataset, trace):
    """Pairs for the validation points; every one of them must be covered."""
    pairs, uncovered = apply_trace(trace, dataset)
    val_ids = {dp.u for dp in validation(dataset)}
    if not val_ids:
        raise UndefinedMetricError("dataset has no validation points")
    missing = [u for u in uncovered if u in val_ids]
    if missing:
        raise IncompleteTraceError(missing)
    return [(dp, pred) for dp, pred in pairs if dp.u in val_ids]


def _predictor(cfg: Config, args):
    pred = cfg.predictor
    spec_path = getattr(args, "spec", None)
    if spec_path:
        with open(spec_path) as fh:
            d = yaml.safe_load(fh) or {}
        pred = predictor_from_dict(d.get("predictor", d))
    model = getattr(args, "model", None) or pred.model
    spec = pred.spec
    if model == "stochastic" and spec is None:
        raise ConfigError("stochastic model needs --spec or a predictor section in --config")
    if args.seed is not None and spec is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    return model, spec


def _trace_for(dataset, cfg: Config, args) -> PredictionTrace:
    if args.trace:
        return _read_trace(args.trace)
    model, spec = _predictor(cfg, args)
    return predict_all(dataset, model, spec)


def format_report(r: MetricsReport) -> str:
    def pct(v):
        return "n/a" if v is None else f"{v:.4f}"

    lines = [
        f"guard          T_G = {r.t_g_frames:g} frames = {r.t_g_slots} slots (reserved {2 * r.t_g_slots + 1})",
        f"horizon        rho = {r.rho} slots",
        f"points         {r.n_points} evaluated, {r.n_urll} URLL",
        f"reliability    ER = {r.er_percent:.4f} %",
        f"utilization    EZ = {r.ez_percent:.4f} %   (unclamped form {r.ez_literal_percent:.4f} %)",
        f"classification precision {pct(r.precision)}  recall {pct(r.recall)}  accuracy {r.accuracy:.4f}",
        f"               TP {r.confusion.tp}  FP {r.confusion.fp}  TN {r.confusion.tn}  FN {r.confusion.fn}",
        f"false-positive guards {r.fp_guard_count}, {r.fp_guard_slots} slots held idle",
    ]
    if r.timeline_policy is not None:
        lines.append(f"slot-exact     [{r.timeline_policy}] R = {r.timeline_r_percent:.4f} %  "
                     f"Z = {r.timeline_z_percent:.4f} %")
    lines.append("request time   n'   count      mean       std")
    for n, g in r.grouped_rt.items():
        lines.append(f"               {n:2d} {g.count:7d} {g.mean:9.4f} {g.std:9.4f}")
    return "\n".join(lines)


def cmd_generate(args) -> int:
    cfg = _config(args)
    scen = cfg.scenario
    if args.seed is not None:
        scen = dataclasses.replace(scen, seed=args.seed)
    points = build_dataset(scen, cfg.timing)
    write_dataset(points, args.out)
    log.info("wrote %d data points to %s", len(points), args.out)
    return 0


def cmd_predict(args) -> int:
    cfg = _config(args)
    dataset = _read_dataset(args.dataset)
    if args.model == "trace":
        if not args.trace:
            raise ConfigError("--model trace needs --trace")
        trace = _read_trace(args.trace)
        require_complete(trace, dataset)
    else:
        model, spec = _predictor(cfg, args)
        trace = predict_all(dataset, model, spec)
    write_trace(trace, args.out)
    log.info("wrote %d predictions to %s", len(trace), args.out)
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    dataset = _read_dataset(args.dataset)
    pairs = _eval_pairs(dataset, _trace_for(dataset, cfg, args))
    t_g = cfg.t_g_frames if args.tg_frames is None else args.tg_frames
    guard = GuardConfig.from_frames(t_g, cfg.timing)
    rho = args.rho if args.rho is not None else cfg.rho
    policy = Policy(args.policy) if args.policy else Policy.PROACTIVE
    report = evaluate(pairs, cfg.timing, guard, rho=rho, timeline_policy=policy)
    print(format_report(report))
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if args.dump_timeline:
        horizon = report.rho
        with open(args.dump_timeline, "w") as fh:
            fh.write("# u,states  ('.' idle, 'e' eMBB, 'U' URLL, 'X' collision; slot 1 first)\n")
            for dp, pred in sorted(pairs, key=lambda p: p[0].u):
                tl = build_timeline(dp, plan_guard(pred, guard, cfg.timing), policy, horizon)
                fh.write(f"{dp.u},{tl.dump()}\n")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    dataset = _read_dataset(args.dataset)
    pairs = _eval_pairs(dataset, _trace_for(dataset, cfg, args))
    grid = validate_grid(args.grid) if args.grid else cfg.grid
    policy = Policy(args.policy) if args.policy else cfg.sweep_policy
    rho = args.rho if args.rho is not None else cfg.rho
    rows = run_sweep(pairs, cfg.timing, grid, rho=rho, policy=policy)
    write_rows(rows, SWEEP_COLUMNS, args.out if args.out else sys.stdout)
    return 0


def cmd_baselines(args) -> int:
    cfg = _config(args)
    dataset = _read_dataset(args.dataset)
    pairs = _eval_pairs(dataset, _trace_for(dataset, cfg, args))
    t_g = cfg.t_g_frames if args.tg_frames is None else args.tg_frames
    guard = GuardConfig.from_frames(t_g, cfg.timing)
    rho = args.rho if args.rho is not None else cfg.rho
    rows = run_baselines(pairs, cfg.timing, guard, rho=rho)
    write_rows(rows, BASELINE_COLUMNS, args.out if args.out else sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coexist", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, dataset=True):
        sp.add_argument("--config", help="YAML run configuration")
        sp.add_argument("--seed", type=int, help="override the scenario/predictor seed")
        if dataset:
            sp.add_argument("--dataset", required=True, help="dataset CSV from `generate`")

    g = sub.add_parser("generate", help="generate, slice and split a dataset")
    common(g, dataset=False)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    pr = sub.add_parser("predict", help="write a prediction trace for a dataset")
    common(pr)
    pr.add_argument("--model", choices=["oracle", "stochastic", "trace"], default=None)
    pr.add_argument("--spec", help="YAML predictor spec (stochastic model)")
    pr.add_argument("--trace", help="existing trace to validate and copy (--model trace)")
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "metrics report for one guard width"),
        ("sweep", cmd_sweep, "reliability/utilization frontier over a guard grid"),
        ("baselines", cmd_baselines, "greedy / orthogonal / proactive slot-exact comparison"),
    ):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--trace", help="prediction trace; otherwise predicted from the config")
        sp.add_argument("--spec", help="YAML predictor spec used when no --trace is given")
        sp.add_argument("--rho", type=int, help="utilization horizon in slots")
        sp.add_argument("--out")
        if name != "sweep":
            sp.add_argument("--tg-frames", type=float, help="guard half-width in frames")
        else:
            sp.add_argument("--grid", type=float, nargs="+", help="explicit guard grid in frames")
        if name != "baselines":
            sp.add_argument("--policy", choices=[p.value for p in Policy])
        if name == "evaluate":
            sp.add_argument("--dump-timeline", help="write per-point slot states here")
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TraceFormatError, IncompleteTraceError, UndefinedMetricError, OSError, ValueError) as e:
        print(f"coexist {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
