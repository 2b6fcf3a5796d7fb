"""Reduced-scale consistency suites behind the ``selftest`` CLI command.

Each suite runs a deterministic, seed-derived slice of the invariants the
full test suite checks at scale, and reports a (checks, failures) count.
The ``inject_fault`` flag perturbs one comparison per suite so the failure
reporting path itself can be exercised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import globalcheck, local, psd, search
from .diagcalc import (
    InequalityProblem,
    PhiSpec,
    deficiency,
    deficiency_gradient_check,
    diag_first_partials,
    diag_second_partials,
    diagonal_matrix,
)
from .means import GiniMean, GiniParams, Interval, Weights, chi, gini_mean, power_mean


@dataclass
class SuiteResult:
    name: str
    checks: int
    failures: int
    note: str = ""


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, salt]))


def _random_params(rng, low=-3.0, high=3.0) -> GiniParams:
    return GiniParams(float(rng.uniform(low, high)), float(rng.uniform(low, high)))


def _random_problem(rng, phi_kind: str, k: int = 2, n: int = 2) -> InequalityProblem:
    w = Weights(rng.uniform(0.2, 1.0, n))
    phi = PhiSpec.sum() if phi_kind == "sum" else PhiSpec.product()
    return InequalityProblem(
        left=GiniMean(_random_params(rng), w),
        right=tuple(GiniMean(_random_params(rng), w) for _ in range(k)),
        phi=phi,
        box=tuple(Interval(0.2, 5.0) for _ in range(k)),
    )


def _suite_mean_reductions(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 1)
    checks = failures = 0
    for _ in range(200):
        n = int(rng.integers(2, 6))
        w = Weights(rng.uniform(0.1, 1.0, n))
        r = float(rng.uniform(-5.0, 5.0))
        x = np.exp(rng.uniform(-3.0, 3.0, n))
        g = gini_mean(GiniParams(r, 0.0), w, x)
        h = power_mean(r, w, x)
        if fault and checks == 0:
            h *= 1.0 + 1e-6
        checks += 1
        if abs(g - h) > 1e-12 * abs(h):
            failures += 1
        c = float(np.exp(rng.uniform(-2.0, 2.0)))
        checks += 1
        if abs(gini_mean(GiniParams(r, 0.5), w, np.full(n, c)) - c) > 1e-12 * c:
            failures += 1
    return SuiteResult("mean_reductions", checks, failures)


def _suite_seam(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 2)
    checks = failures = 0
    for _ in range(100):
        r = float(rng.uniform(-3.0, 3.0))
        n = int(rng.integers(2, 5))
        w = Weights(rng.uniform(0.2, 1.0, n))
        x = np.exp(rng.uniform(-1.5, 1.5, n))
        base = gini_mean(GiniParams(r, r), w, x)
        t = float(np.exp(rng.uniform(-1.0, 1.0)))
        chi_base = chi(GiniParams(r, r), t)
        for ds in (1e-7, -1e-7):
            checks += 1
            val = gini_mean(GiniParams(r, r + ds), w, x)
            if fault and failures == 0 and checks == 1:
                val *= 1.0 + 1e-3
            if abs(val - base) > 1e-5 * abs(base):
                failures += 1
            checks += 1
            if abs(chi(GiniParams(r, r + ds), t) - chi_base) > 1e-5 * max(
                1.0, abs(chi_base)
            ):
                failures += 1
    return SuiteResult("branch_seam", checks, failures)


def _suite_diag_partials(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 3)
    checks = failures = 0
    for _ in range(25):
        n = int(rng.integers(2, 5))
        w = Weights(rng.uniform(0.2, 1.0, n))
        params = _random_params(rng)
        mean = GiniMean(params, w)
        t = float(np.exp(rng.uniform(-1.0, 1.0)))
        first = diag_first_partials(mean, t)
        checks += 1
        if abs(first.sum() - 1.0) > 1e-12:
            failures += 1
        second = diag_second_partials(mean, t)
        lam = w.lam
        expect = (np.diag(lam) - np.outer(lam, lam)) * (
            (params.r + params.s - 1.0) / t
        )
        if fault and checks == 1:
            expect = expect + 1e-3
        checks += 1
        if np.abs(second - expect).max() > 1e-10 * max(1.0, np.abs(expect).max()):
            failures += 1
    return SuiteResult("diagonal_partials", checks, failures)


def _suite_psd_oracle(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 4)
    checks = failures = 0
    for _ in range(2000):
        k = int(rng.integers(2, 6))
        c0 = float(rng.uniform(-5.0, 5.0))
        c = rng.uniform(-5.0, 5.0, k)
        sd = psd.ShiftedDiagonal(c0, tuple(c))
        closed = psd.classify_shifted_diagonal(sd).klass
        oracle = psd.classify_symmetric(sd.matrix()).klass
        vals = psd.eigvals_symmetric(sd.matrix())
        lam_min = vals[0]
        scale = max(1.0, float(np.abs(vals).max()))
        if fault and checks == 0:
            closed = psd.PsdClass.INDEFINITE
            lam_min = scale  # force the mismatch to count
        checks += 1
        if closed is not oracle and abs(lam_min) > 1e-9 * scale:
            failures += 1
    return SuiteResult("psd_oracle", checks, failures)


def _suite_diagonal_zero(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 5)
    checks = failures = 0

    def phi_val(y):
        return float(y[0] + y[1] + 0.5 * y[0] * y[1])

    def phi_grad(y):
        return np.array([1.0 + 0.5 * y[1], 1.0 + 0.5 * y[0]])

    def phi_hess(y):
        return np.array([[0.0, 0.5], [0.5, 0.0]])

    custom = PhiSpec.custom(phi_val, phi_grad, phi_hess, Interval(1.0, 7.0))
    w = Weights([0.4, 0.6])
    problems = [
        _random_problem(rng, "sum"),
        _random_problem(rng, "product"),
        InequalityProblem(
            left=GiniMean(GiniParams(2.0, 1.0), w),
            right=(GiniMean(GiniParams(1.5, 0.0), w), GiniMean(GiniParams(2.0, 0.0), w)),
            phi=custom,
            box=(Interval(0.5, 2.0), Interval(0.5, 2.0)),
        ),
    ]
    for problem in problems:
        for _ in range(40):
            y = np.array(
                [
                    float(rng.uniform(iv.lo + 0.1, min(iv.hi, 5.0) - 0.1))
                    for iv in problem.box
                ]
            )
            val = deficiency(problem, diagonal_matrix(y, problem.n))
            if fault and checks == 0:
                val += 1e-6
            checks += 1
            if abs(val) > 1e-10:
                failures += 1
    return SuiteResult("diagonal_zero", checks, failures)


def _suite_gradient_check(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 6)
    checks = failures = 0
    for i in range(8):
        problem = _random_problem(rng, "sum" if i % 2 == 0 else "product")
        y = rng.uniform(0.5, 4.0, problem.k)
        rep = deficiency_gradient_check(problem, y)
        worst = max(rep.max_rel_grad, rep.max_rel_hess)
        if fault and checks == 0:
            worst = 1.0
        checks += 1
        if worst > 1e-5:
            failures += 1
    return SuiteResult("deficiency_derivatives", checks, failures)


def _suite_local_agreement(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 7)
    checks = failures = 0
    for _ in range(60):
        k = int(rng.integers(2, 4))
        gammas = rng.uniform(-2.0, 3.0, k + 1)
        box = tuple(
            Interval(float(lo), float(lo + rng.uniform(0.5, 4.0)))
            for lo in rng.uniform(0.1, 2.0, k)
        )
        decider = local.decide_minkowski_local(gammas, box)
        rs = [GiniParams((g + 1.0) / 2.0, (g + 1.0) / 2.0) for g in gammas]
        w = Weights.equal(2)
        problem = InequalityProblem(
            left=GiniMean(rs[0], w),
            right=tuple(GiniMean(p, w) for p in rs[1:]),
            phi=PhiSpec.sum(),
            box=box,
        )
        spec = local.GammaSpec.from_problem(problem)
        pts, classes, vals = local.scan_gamma_grid(spec, 9)
        scan_fails = bool(np.any(classes == psd.kernels.INDEFINITE))
        decider_fails = decider.klass is local.LocalClass.NECESSARY_FAILS
        checks += 1
        bad = scan_fails and not decider_fails
        if fault and checks == 1:
            bad = True
        if bad:
            failures += 1
    return SuiteResult("local_agreement", checks, failures)


def _suite_global_consistency(seed: int, fault: bool) -> SuiteResult:
    rng = _rng(seed, 8)
    checks = failures = 0
    holds_found = 0
    for _ in range(400):
        k = int(rng.integers(2, 4))
        params = [_random_params(rng) for _ in range(k + 1)]
        verdict = globalcheck.decide_minkowski_global(params)
        if verdict.klass is not globalcheck.GlobalClass.HOLDS_GLOBAL:
            continue
        holds_found += 1
        gammas = np.array([p.r + p.s - 1.0 for p in params])
        box = tuple(Interval(0.0, np.inf) for _ in range(k))
        lv = local.decide_minkowski_local(gammas, box)
        bad = lv.klass is local.LocalClass.NECESSARY_FAILS
        if fault and checks == 0:
            bad = True
        checks += 1
        if bad:
            failures += 1
        if holds_found <= 10:
            gv = globalcheck.check_pointwise_minkowski(params, grid=15, simplex=5)
            checks += 1
            if gv.klass is not globalcheck.GlobalClass.HOLDS_GLOBAL:
                failures += 1
    return SuiteResult("global_consistency", checks, failures)


def _suite_search(seed: int, fault: bool) -> SuiteResult:
    checks = failures = 0
    w = Weights.equal(2)
    box = (Interval(0.0, np.inf), Interval(0.0, np.inf))

    def minkowski(p: float) -> InequalityProblem:
        return InequalityProblem(
            left=GiniMean(GiniParams(p, 0.0), w),
            right=(GiniMean(GiniParams(p, 0.0), w), GiniMean(GiniParams(p, 0.0), w)),
            phi=PhiSpec.sum(),
            box=box,
        )

    found = search.search_global(minkowski(0.5), budget=5000, seed=seed)
    checks += 1
    if found is None or found.gap >= -1e-6:
        failures += 1
    none = search.search_global(minkowski(2.0), budget=5000, seed=seed)
    if fault and failures == 0:
        none = found
    checks += 1
    if none is not None:
        failures += 1
    if found is not None:
        small = search.shrink(minkowski(0.5), found)
        checks += 1
        if small.distance_to_diagonal > found.distance_to_diagonal + 1e-12:
            failures += 1
    return SuiteResult("search_soundness", checks, failures)


_SUITES: list[Callable[[int, bool], SuiteResult]] = [
    _suite_mean_reductions,
    _suite_seam,
    _suite_diag_partials,
    _suite_psd_oracle,
    _suite_diagonal_zero,
    _suite_gradient_check,
    _suite_local_agreement,
    _suite_global_consistency,
    _suite_search,
]


def run_selftest(seed: int = 0, inject_fault: bool = False, out=print) -> int:
    """Run all suites; prints one line per suite plus a summary.

    Returns 0 when every suite passes, 1 otherwise.  Output contains no
    timing data, so runs with the same seed print identical bytes.
    """
    results = [suite(seed, inject_fault) for suite in _SUITES]
    for res in results:
        status = "PASS" if res.failures == 0 else "FAIL"
        note = f" {res.note}" if res.note else ""
        out(f"{res.name}: {status} ({res.checks} checks, {res.failures} failures){note}")
    total_checks = sum(r.checks for r in results)
    total_failures = sum(r.failures for r in results)
    suites_failed = sum(1 for r in results if r.failures)
    out(
        f"summary: {len(results)} suites, {total_checks} checks, "
        f"{total_failures} failures, {suites_failed} suites failed"
    )
    return 0 if total_failures == 0 else 1
