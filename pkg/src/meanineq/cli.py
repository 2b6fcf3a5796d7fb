"""Command line interface.

Three subcommands: ``eval`` prints mean / chi / curvature-matrix values,
``analyze`` runs the local and global decision pipeline on a JSON config
and emits a report, ``selftest`` runs the reduced consistency suites.

Exit status: 0 holds, 1 fails with witness, 2 inconclusive, 64 usage or
config error, 65 domain error on evaluation input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import local, report
from ._backend import apply_thread_cap
from .errors import ConfigError, DomainError, MeanineqError, ShapeError
from .means import GiniParams, Weights, chi, gini_mean, power_mean
from .selftest import run_selftest

EX_USAGE = 64
EX_DATA = 65


def _parse_kv(pairs: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}")
        out[key] = val
    return out


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v != ""])
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _need(kv: dict[str, str], *keys: str) -> list[str]:
    missing = [k for k in keys if k not in kv]
    if missing:
        raise ConfigError(f"missing arguments: {', '.join(missing)}")
    extra = set(kv) - set(keys)
    if extra:
        raise ConfigError(f"unknown arguments: {', '.join(sorted(extra))}")
    return [kv[k] for k in keys]


def _print_value(value, fmt: str) -> None:
    if fmt == "machine":
        if isinstance(value, np.ndarray):
            payload = {"matrix" if value.ndim == 2 else "values": value.tolist()}
        else:
            payload = {"value": value}
        print(json.dumps(payload, sort_keys=True))
    else:
        if isinstance(value, np.ndarray) and value.ndim == 2:
            for row in value:
                print("  ".join(f"{v:.17g}" for v in row))
        elif isinstance(value, np.ndarray):
            print("  ".join(f"{v:.17g}" for v in value))
        else:
            print(f"{value:.17g}")


def cmd_eval(args) -> int:
    kv = _parse_kv(args.params)
    if args.subject == "gini":
        r, s, w, x = _need(kv, "r", "s", "w", "x")
        value = gini_mean(
            GiniParams(float(r), float(s)), Weights(_floats(w)), _floats(x)
        )
    elif args.subject == "power":
        p, w, x = _need(kv, "p", "w", "x")
        value = power_mean(float(p), Weights(_floats(w)), _floats(x))
    elif args.subject == "chi":
        r, s, t = _need(kv, "r", "s", "t")
        value = chi(GiniParams(float(r), float(s)), float(t))
    elif args.subject == "gamma":
        if args.config is None:
            raise ConfigError("eval gamma needs --config")
        (y,) = _need(kv, "y")
        cfg = report.load_config(args.config)
        spec = local.GammaSpec.from_problem(cfg.problem())
        value = local.gamma_at(spec, _floats(y))
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown subject {args.subject!r}")
    _print_value(value, args.format)
    return 0


def cmd_analyze(args) -> int:
    cfg = report.load_config(args.config)
    overrides = {}
    if args.grid is not None:
        overrides["grid"] = args.grid
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = report.ProblemConfig.from_dict({**cfg.to_dict(), **overrides})
    rep, status = report.analyze(cfg)
    if args.format == "machine":
        sys.stdout.write(report.to_machine(rep))
    else:
        sys.stdout.write(report.to_human(rep))
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meanineq",
        description=(
            "Evaluate coupled mean inequalities, decide their local and "
            "global validity, and search for counterexamples."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a mean, chi, or curvature matrix")
    p_eval.add_argument("subject", choices=["gini", "power", "chi", "gamma"])
    p_eval.add_argument("params", nargs="*", help="key=value arguments")
    p_eval.add_argument("--config", help="problem config (needed for gamma)")
    p_eval.add_argument("--format", choices=["human", "machine"], default="human")

    p_an = sub.add_parser("analyze", help="run the decision pipeline on a config")
    p_an.add_argument("--config", required=True, help="path to a JSON problem config")
    p_an.add_argument("--grid", type=int, help="override the local scan resolution")
    p_an.add_argument("--budget", type=int, help="override the search budget")
    p_an.add_argument("--seed", type=int, help="override the search seed")
    p_an.add_argument("--format", choices=["human", "machine"], default="human")

    p_st = sub.add_parser("selftest", help="run the reduced consistency suites")
    p_st.add_argument("--seed", type=int, default=0)
    p_st.add_argument(
        "--inject-fault",
        action="store_true",
        help="testing hook: perturb one comparison per suite",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        # parse_known_args lets key=value pairs follow options in `eval`
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EX_USAGE if exc.code not in (0, None) else 0
    if args.command == "eval":
        args.params = list(args.params) + extra
    elif extra:
        print(f"error: unrecognized arguments: {' '.join(extra)}", file=sys.stderr)
        return EX_USAGE
    apply_thread_cap()
    try:
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        return run_selftest(seed=args.seed, inject_fault=args.inject_fault)
    except (ConfigError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (DomainError, MeanineqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
