"""Problem configuration parsing and report assembly for the CLI.

Configs and machine reports are canonical JSON: UTF-8, sorted keys, two
space indentation, floats through repr (17 significant digits round-trip).
Parsing a machine report and re-serializing it reproduces the bytes.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import globalcheck, local, search
from .diagcalc import (
    InequalityProblem,
    PhiSpec,
    deficiency_gradient_check,
)
from .errors import ConfigError, MeanineqError
from .means import GiniMean, GiniParams, Interval, Weights

_MEAN_KEYS = {
    "gini": {"family", "r", "s"},
    "power": {"family", "p"},
}

_CONFIG_KEYS = {
    "n",
    "weights",
    "phi",
    "outer",
    "inner",
    "box",
    "grid",
    "budget",
    "seed",
}


def _parse_mean(obj, slot: str) -> GiniParams:
    if not isinstance(obj, dict) or "family" not in obj:
        raise ConfigError(f"{slot}: expected an object with a 'family' field")
    family = obj["family"]
    if family not in _MEAN_KEYS:
        raise ConfigError(f"{slot}: unknown mean family {family!r}")
    extra = set(obj) - _MEAN_KEYS[family]
    if extra:
        raise ConfigError(f"{slot}: unknown fields {sorted(extra)}")
    try:
        if family == "gini":
            return GiniParams(float(obj["r"]), float(obj["s"]))
        return GiniParams(float(obj["p"]), 0.0)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{slot}: bad mean parameters ({exc})") from exc


def _parse_interval(obj, slot: str) -> Interval:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ConfigError(f"{slot}: expected [lo, hi]")
    lo = -math.inf if obj[0] is None else float(obj[0])
    hi = math.inf if obj[1] is None else float(obj[1])
    try:
        return Interval(lo, hi)
    except MeanineqError as exc:
        raise ConfigError(f"{slot}: {exc}") from exc


@dataclass(frozen=True)
class ProblemConfig:
    """Validated CLI problem description (two-parameter means only)."""

    n: int
    phi: str
    outer: GiniParams
    inner: tuple[GiniParams, ...]
    box: tuple[Interval, ...]
    weights: tuple[float, ...] | None = None
    grid: int = 9
    budget: int = 100_000
    seed: int = 0

    @classmethod
    def from_dict(cls, obj: dict) -> "ProblemConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config root must be an object")
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        for key in ("phi", "outer", "inner"):
            if key not in obj:
                raise ConfigError(f"missing required field {key!r}")
        phi = obj["phi"]
        if phi not in ("sum", "product"):
            raise ConfigError(f"phi must be 'sum' or 'product', got {phi!r}")
        inner_raw = obj["inner"]
        if not isinstance(inner_raw, list) or len(inner_raw) < 2:
            raise ConfigError("inner must list at least two means")
        inner = tuple(
            _parse_mean(m, f"inner[{j}]") for j, m in enumerate(inner_raw)
        )
        k = len(inner)
        box_raw = obj.get("box", [[0.0, None]] * k)
        if not isinstance(box_raw, list) or len(box_raw) != k:
            raise ConfigError("box must list one [lo, hi] pair per inner mean")
        box = tuple(_parse_interval(b, f"box[{j}]") for j, b in enumerate(box_raw))
        try:
            n = int(obj.get("n", 2))
            grid = int(obj.get("grid", 9))
            budget = int(obj.get("budget", 100_000))
            seed = int(obj.get("seed", 0))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad integer field ({exc})") from exc
        if n < 2:
            raise ConfigError("n must be at least 2")
        if grid < 3:
            raise ConfigError("grid must be at least 3")
        if budget < 0:
            raise ConfigError("budget must be nonnegative")
        weights = obj.get("weights")
        if weights is not None:
            if not isinstance(weights, list) or len(weights) != n:
                raise ConfigError("weights must list n positive numbers")
            weights = tuple(float(w) for w in weights)
        return cls(
            n=n,
            phi=phi,
            outer=_parse_mean(obj["outer"], "outer"),
            inner=inner,
            box=box,
            weights=weights,
            grid=grid,
            budget=budget,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "phi": self.phi,
            "outer": {"family": "gini", "r": self.outer.r, "s": self.outer.s},
            "inner": [
                {"family": "gini", "r": p.r, "s": p.s} for p in self.inner
            ],
            "box": [
                [None if math.isinf(iv.lo) else iv.lo, None if math.isinf(iv.hi) else iv.hi]
                for iv in self.box
            ],
            "weights": list(self.weights) if self.weights is not None else None,
            "grid": self.grid,
            "budget": self.budget,
            "seed": self.seed,
        }

    def problem(self) -> InequalityProblem:
        w = Weights(self.weights) if self.weights is not None else Weights.equal(self.n)
        phi = PhiSpec.sum() if self.phi == "sum" else PhiSpec.product()
        try:
            return InequalityProblem(
                left=GiniMean(self.outer, w),
                right=tuple(GiniMean(p, w) for p in self.inner),
                phi=phi,
                box=self.box,
            )
        except MeanineqError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ProblemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return ProblemConfig.from_dict(obj)


def _witness_dict(cex: search.Counterexample | None) -> dict | None:
    if cex is None:
        return None
    return {
        "x": cex.x.tolist(),
        "lhs": cex.lhs,
        "rhs": cex.rhs,
        "gap": cex.gap,
        "distance_to_diagonal": cex.distance_to_diagonal,
    }


def _local_dict(verdict: local.LocalVerdict) -> dict:
    w = verdict.witness
    return {
        "verdict": verdict.klass.value,
        "summary": verdict.summary,
        "witness": None
        if w is None
        else {
            "y": None if w.y is None else np.asarray(w.y).tolist(),
            "gamma": None if w.gamma is None else np.asarray(w.gamma).tolist(),
            "direction": None
            if w.direction is None
            else np.asarray(w.direction).tolist(),
        },
    }


def _global_dict(verdict: globalcheck.GlobalVerdict) -> dict:
    return {
        "verdict": verdict.klass.value,
        "evidence": verdict.evidence,
        "probe": verdict.probe,
    }


def analyze(config: ProblemConfig) -> tuple[dict, int]:
    """Run the full pipeline on a config; returns (report, exit status).

    Status 0 when the inequality holds globally, 1 when it fails (local
    necessary condition or global characterization, with a search witness
    attached when one is found), 2 when all tests are inconclusive.
    """
    t_start = time.perf_counter()
    problem = config.problem()
    params = [config.outer, *config.inner]

    spec = local.GammaSpec.from_problem(problem)
    t0 = time.perf_counter()
    local_verdict = local.local_scan(spec, grid=config.grid)
    t_local = time.perf_counter() - t0

    t0 = time.perf_counter()
    global_results: dict[str, dict] = {}
    if config.phi == "sum":
        main = globalcheck.decide_minkowski_global(params)
        global_results["any_n_decider"] = _global_dict(main)
        if config.n == 2:
            global_results["two_variable_decider"] = _global_dict(
                globalcheck.decide_minkowski_2var(params)
            )
        global_results["pointwise_checker"] = _global_dict(
            globalcheck.check_pointwise_minkowski(params)
        )
    else:
        mirrored = [GiniParams(-config.outer.r, -config.outer.s), *config.inner]
        main = globalcheck.decide_hoelder_global(mirrored)
        global_results["any_n_decider"] = _global_dict(main)
        global_results["pointwise_checker"] = _global_dict(
            globalcheck.check_pointwise_hoelder(
                mirrored, [globalcheck.ratio_interval(iv) for iv in problem.box]
            )
        )
    t_global = time.perf_counter() - t0

    t0 = time.perf_counter()
    counterexample = None
    shrunk = None
    fails = (
        main.klass is globalcheck.GlobalClass.FAILS_GLOBAL
        or local_verdict.klass is local.LocalClass.NECESSARY_FAILS
    )
    if fails and config.budget > 0:
        counterexample = search.search_global(problem, config.budget, config.seed)
        if counterexample is not None:
            shrunk = search.shrink(problem, counterexample)
    t_search = time.perf_counter() - t0

    mid = np.array([iv.midpoint() for iv in problem.box])
    check = deficiency_gradient_check(problem, mid)
    derivative_check = {
        "point": mid.tolist(),
        "max_abs_grad": check.max_abs_grad,
        "max_rel_grad": check.max_rel_grad,
        "max_abs_hess": check.max_abs_hess,
        "max_rel_hess": check.max_rel_hess,
    }

    if main.klass is globalcheck.GlobalClass.HOLDS_GLOBAL:
        status = 0
    elif fails:
        status = 1
    else:
        status = 2

    report = {
        "config": config.to_dict(),
        "weights": {
            "proportional": True,
            "lambda": spec.lam.lam.tolist(),
        },
        "local": _local_dict(local_verdict),
        "global": global_results,
        "counterexample": _witness_dict(counterexample),
        "counterexample_shrunk": _witness_dict(shrunk),
        "derivative_check": derivative_check,
        "status": status,
        "timings": {
            "local_s": t_local,
            "global_s": t_global,
            "search_s": t_search,
            "total_s": time.perf_counter() - t_start,
        },
    }
    return report, status


def to_machine(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def from_machine(text: str) -> dict:
    return json.loads(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def to_human(report: dict) -> str:
    lines = []
    cfg = report["config"]
    inner = ", ".join(f"({m['r']:g},{m['s']:g})" for m in cfg["inner"])
    lines.append(
        f"problem: outer ({cfg['outer']['r']:g},{cfg['outer']['s']:g}) vs "
        f"{cfg['phi']} of [{inner}], n={cfg['n']}"
    )
    lines.append(f"weights: {[_fmt(w) for w in report['weights']['lambda']]}")
    loc = report["local"]
    lines.append(f"local:   {loc['verdict']}")
    lines.append(f"         {loc['summary']}")
    for name, gv in report["global"].items():
        lines.append(f"global/{name}: {gv['verdict']}")
        lines.append(f"         {gv['evidence']}")
    cex = report["counterexample"]
    if cex is None:
        lines.append("counterexample: none")
    else:
        lines.append(
            f"counterexample: gap {_fmt(cex['gap'])} "
            f"(lhs {_fmt(cex['lhs'])}, rhs {_fmt(cex['rhs'])})"
        )
        for row in cex["x"]:
            lines.append("    " + "  ".join(_fmt(v) for v in row))
    dc = report["derivative_check"]
    lines.append(
        "derivative check: max rel grad dev "
        f"{_fmt(dc['max_rel_grad'])}, max rel hess dev {_fmt(dc['max_rel_hess'])}"
    )
    t = report["timings"]
    lines.append(f"timings: total {_fmt(t['total_s'])}s")
    lines.append(f"status: {report['status']}")
    return "\n".join(lines) + "\n"
