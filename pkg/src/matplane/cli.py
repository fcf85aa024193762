"""Command-line entry point.

    matplane run <experiment> [--n --m --k --phantom --alpha --p --seed
                               --budget --out --format --config]
    matplane converge <experiment> --ladder 1000,10000,100000 [...]
    matplane special gamma --m 2 --alpha-grid 0.5:5:0.25 [--out file.csv]

Exit codes: 0 pass, 1 fail, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, MatplaneError
from .harness import (EXPERIMENTS, ExperimentConfig, convergence_study, run,
                      special_gamma_table)
from .phantoms import PHANTOM_KINDS
from .quadrature import SCHEMES


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matplane",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one verification experiment")
    _add_experiment_args(run_p)

    conv_p = sub.add_parser("converge", help="re-run an experiment over a budget ladder")
    _add_experiment_args(conv_p)
    conv_p.add_argument("--ladder", type=str, default="1000,10000,100000",
                        help="comma-separated budgets")

    spec_p = sub.add_parser("special", help="emit special-function tables")
    spec_p.add_argument("table", choices=["gamma"])
    spec_p.add_argument("--m", type=int, default=2)
    spec_p.add_argument("--alpha-grid", type=str, default="0.5:5:0.25",
                        help="start:stop:step")
    spec_p.add_argument("--out", type=str, default=None)
    return parser


def _add_experiment_args(p: argparse.ArgumentParser):
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--phantom", choices=PHANTOM_KINDS, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p", dest="p_index", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=None,
                   help="order or sample count of the main quadrature")
    p.add_argument("--scheme", choices=SCHEMES, default=None)
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("--config", type=str, default=None,
                   help="JSON config file; explicit flags override its values")


def _config_from_args(args) -> ExperimentConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    base.setdefault("experiment", args.experiment)

    dims_d = dict(base.get("dims") or {})
    defaults = {"n": 3, "m": 2, "k": 1}
    if (args.experiment or base.get("experiment")) == "noninjectivity":
        defaults = {"n": 2, "m": 2, "k": 1}
    for key, flag in (("n", args.n), ("m", args.m), ("k", args.k)):
        if flag is not None:
            dims_d[key] = flag
        dims_d.setdefault(key, defaults[key])
    base["dims"] = dims_d

    if args.phantom is not None:
        base["phantom"] = {"kind": args.phantom, "dims": (dims_d["n"], dims_d["m"])}
        if args.phantom == "det_decay":
            base["phantom"]["lam"] = args.alpha or 5.0
        if args.phantom == "boundary_lp":
            base["phantom"]["p"] = args.p_index or 1.5
        if args.phantom == "rank_supported":
            base["phantom"]["epsilon"] = 0.3
            base["phantom"]["k"] = dims_d["k"]
    if args.seed is not None:
        base["seed"] = args.seed
    if args.alpha is not None:
        base["alpha"] = args.alpha
    if args.p_index is not None:
        base["p"] = args.p_index
    if args.cases is not None:
        base["cases"] = args.cases
    if args.out is not None:
        base["output"] = args.out
    if args.format is not None:
        base["format"] = args.format
    if args.budget is not None or args.scheme is not None:
        quad = dict(base.get("quadrature") or {})
        quad.setdefault("scheme", "gauss_hermite_tensor")
        quad.setdefault("order_or_samples", 16)
        if args.scheme is not None:
            quad["scheme"] = args.scheme
        if args.budget is not None:
            quad["order_or_samples"] = args.budget
        base["quadrature"] = quad

    return ExperimentConfig.from_dict(base)


def _parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:step",
                          field="alpha-grid") from exc
    return np.arange(start, stop + 1e-12, step)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "special":
            return _cmd_special(args)
        config = _config_from_args(args)
        if args.command == "run":
            report = run(config)
            summary = {
                "experiment": config.experiment,
                "passed": report.passed,
                "cases": len(report.cases),
                "max_residual": max((c.residual for c in report.cases
                                     if c.residual is not None), default=None),
            }
            print(json.dumps(summary, indent=2))
            return 0 if report.passed else 1
        rows = convergence_study(config, [int(v) for v in args.ladder.split(",")])
        print("budget,residual,error_estimate")
        for budget, resid, err in rows:
            print(f"{budget},{float(resid)!r},{float(err)!r}")
        ok = all(b[1] <= 2 * a[1] + 1e-300 for a, b in zip(rows, rows[1:]))
        return 0 if ok else 1
    except ConfigError as exc:
        print(f"config error ({exc.field}): {exc}", file=sys.stderr)
        return 2
    except MatplaneError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _cmd_special(args) -> int:
    grid = _parse_grid(args.alpha_grid)
    rows = special_gamma_table(args.m, grid)
    lines = ["alpha,gamma,split_residual"]
    lines += [f"{a!r},{v!r},{r!r}" for (a, v, r) in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
