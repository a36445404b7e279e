"""Command-line interface.

Subcommands:
  estimate       draw or load a sample batch and write an estimated moment
                 tensor in the text tensor format
  effective-dim  print the effective dimensions of a covariance as JSON
  check-bounds   evaluate a perturbation bound and print the report as JSON
  tensor-norm    read a text-format tensor and print a norm result as JSON
  experiment     run a config-driven error-scaling experiment, write CSV/JSON

All output is deterministic for fixed flags; the experiment --threads flag
affects speed only, never bytes.  Exit codes: 0 success, 1 error, 2 an
experiment's declared invariant checks failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .effective_dim import max_norm_effective_dim
from .estimators import (
    isserlis_estimator_asymmetric,
    isserlis_estimator_symmetric,
    sample_moment_asymmetric,
    sample_moment_symmetric,
)
from .experiments import ExperimentConfig, build_context, emit, fit_slopes, run_checks, run_experiment
from .gaussian import load_covariance_csv, load_samples_csv, make_covariance, sample
from .perturbation import check_perturbation_bound, check_relative_bound
from .tensor import load_tensor, max_norm, operator_norm_hopm, save_tensor


def _parse_blocks(text):
    try:
        blocks = tuple(int(b) for b in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad block list {text!r}") from None
    if not blocks or any(b < 1 for b in blocks):
        raise argparse.ArgumentTypeError(f"bad block list {text!r}")
    return blocks


def _parse_params(pairs):
    params = {}
    for item in pairs or []:
        if "=" not in item:
            raise SystemExit(f"--param needs key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            params[key] = float(val)
        except ValueError:
            params[key] = val
    return params


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _model_from_args(args):
    if args.input:
        return load_covariance_csv(args.input, blocks=getattr(args, "blocks", None))
    if not args.family or not args.dim:
        raise SystemExit("need --input or both --family and --dim")
    return make_covariance(args.family, args.dim, seed=args.seed,
                           **_parse_params(args.param))


def _cmd_estimate(args) -> int:
    if args.input:
        batch = load_samples_csv(args.input, blocks=args.blocks)
    else:
        model = _model_from_args(args)
        if args.n is None:
            raise SystemExit("need --n when sampling from a family")
        batch = sample(model, args.n, args.seed)
        if args.blocks:
            from .gaussian import SampleBatch
            batch = SampleBatch(data=batch.data, blocks=args.blocks,
                                seed=batch.seed, n=batch.n, family=batch.family)
    asymmetric = args.blocks is not None and len(args.blocks) > 1
    if asymmetric:
        if args.estimator == "sample":
            out = sample_moment_asymmetric(batch)
        else:
            out = isserlis_estimator_asymmetric(batch)
    else:
        if args.order is None:
            raise SystemExit("need --order for the symmetric estimators")
        if args.estimator == "sample":
            out = sample_moment_symmetric(batch, args.order)
        else:
            out = isserlis_estimator_symmetric(batch, args.order)
    save_tensor(out.tensor, args.out)
    _print_json({
        "out": args.out,
        "estimator": out.estimator,
        "shape": list(out.tensor.shape),
        "n": out.n,
        "max_norm": float(np.max(np.abs(out.tensor))),
    })
    return 0


def _cmd_effective_dim(args) -> int:
    model = _model_from_args(args)
    dims = max_norm_effective_dim(model, mc_samples=args.mc_samples, seed=args.seed)
    _print_json(dims.to_json())
    return 0


def _cmd_check_bounds(args) -> int:
    norm = {"max": "max", "op": "operator", "operator": "operator"}[args.norm]
    cov_x = load_covariance_csv(args.covx).matrix
    cov_y = load_covariance_csv(args.covy).matrix
    if args.blocks and len(args.blocks) > 1:
        if len(args.blocks) != args.order:
            raise SystemExit(
                f"--order {args.order} does not match {len(args.blocks)} blocks")
        report = check_perturbation_bound(cov_x, cov_y, list(args.blocks),
                                          p=args.order, norm=norm,
                                          hopm_restarts=args.restarts, seed=args.seed)
    else:
        report = check_relative_bound(cov_x, cov_y, p=args.order, norm=norm,
                                      hopm_restarts=args.restarts, seed=args.seed)
    _print_json(report.to_json())
    return 0


def _cmd_tensor_norm(args) -> int:
    t = load_tensor(args.input)
    if args.norm == "max":
        res = max_norm(t)
    else:
        res = operator_norm_hopm(t, restarts=args.restarts, seed=args.seed)
    out = res.to_json()
    out.pop("certificate", None)
    _print_json(out)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    out_dir = args.out or config.out
    if not out_dir:
        raise SystemExit("need --out or an 'out' entry in the config")
    threads = args.threads if args.threads is not None else config.threads
    ctx = build_context(config)
    records = run_experiment(config, threads=threads, context=ctx)
    fits = fit_slopes(records) if len(config.n_grid) >= 3 else []
    checks = run_checks(records, config.checks)
    csv_path, json_path = emit(records, fits, out_dir, config=config, checks=checks)
    failed = [c for c in checks if not c["passed"]]
    print(f"wrote {csv_path} and {json_path}; "
          f"{len(records)} records, {len(checks)} checks, {len(failed)} failed")
    return 2 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="gmoments",
                                  description="Gaussian moment tensor estimation toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    def add_model_args(p):
        p.add_argument("--input", help="CSV input (header row of column names)")
        p.add_argument("--family", help="covariance family")
        p.add_argument("--dim", type=int, help="dimension d")
        p.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="family parameter, repeatable")
        p.add_argument("--seed", type=int, default=0)

    p_est = sub.add_parser("estimate", help="estimate a moment tensor")
    add_model_args(p_est)
    p_est.add_argument("--n", type=int, help="sample count when simulating")
    p_est.add_argument("--order", type=int, help="tensor order p (symmetric case)")
    p_est.add_argument("--estimator", choices=["sample", "isserlis"], required=True)
    p_est.add_argument("--blocks", type=_parse_blocks,
                       help="comma-separated block sizes d1,d2,...,dp")
    p_est.add_argument("--out", required=True, help="output tensor file")
    p_est.set_defaults(func=_cmd_estimate)

    p_dim = sub.add_parser("effective-dim", help="effective dimensions of a covariance")
    add_model_args(p_dim)
    p_dim.add_argument("--mc-samples", type=int, default=100_000)
    p_dim.set_defaults(func=_cmd_effective_dim)

    p_chk = sub.add_parser("check-bounds", help="evaluate a perturbation bound")
    p_chk.add_argument("--covx", required=True, help="CSV covariance of X")
    p_chk.add_argument("--covy", required=True, help="CSV reference covariance of Y")
    p_chk.add_argument("--order", type=int, required=True, help="tensor order p")
    p_chk.add_argument("--norm", choices=["max", "op", "operator"], required=True)
    p_chk.add_argument("--blocks", type=_parse_blocks,
                       help="block sizes for the joint-covariance bound")
    p_chk.add_argument("--restarts", type=int, default=20)
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.set_defaults(func=_cmd_check_bounds)

    p_nrm = sub.add_parser("tensor-norm", help="norm of a text-format tensor")
    p_nrm.add_argument("--input", required=True, help="tensor file")
    p_nrm.add_argument("--norm", choices=["max", "op"], required=True)
    p_nrm.add_argument("--restarts", type=int, default=20)
    p_nrm.add_argument("--seed", type=int, default=0)
    p_nrm.set_defaults(func=_cmd_tensor_norm)

    p_exp = sub.add_parser("experiment", help="run an error-scaling experiment")
    p_exp.add_argument("--config", required=True, help="JSON experiment config")
    p_exp.add_argument("--out", help="output directory")
    p_exp.add_argument("--threads", type=int, default=None,
                       help="worker threads (speed only, output unchanged)")
    p_exp.set_defaults(func=_cmd_experiment)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # surface errors with exit code 1 for scripting
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
