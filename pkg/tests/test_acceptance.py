"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured statistic and runtime.  Tolerances and budgets are fixed here,
not tuned at runtime.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import time

import numpy as np

from meanineq import (
    GammaSpec,
    GiniMean,
    GiniParams,
    GlobalClass,
    Interval,
    LocalClass,
    Weights,
    build_psi_probe,
    decide_hoelder_global,
    decide_minkowski_global,
    decide_minkowski_local,
    deficiency,
    diag_first_partials,
    diag_second_partials,
    diagonal_matrix,
    gamma_at,
    gini_as_bajraktarevic,
    gini_mean,
    jacobi_eigh,
    local_scan,
    power_mean,
    scan_gamma_grid,
    search_global,
    search_local,
)
from meanineq._backend import kernels
from meanineq.local import psi_probe_sign
from meanineq.psd import classify_shifted_diagonal_batch

from helpers import (
    conjugate_hoelder,
    custom_phi_problem,
    gini_problem,
    power_minkowski,
    rng_for,
    smooth_custom_spec,
)

P = GiniParams


def report(name, elapsed, limit, detail):
    print(f"\n{name}: PASS ({detail}; {elapsed:.2f}s < {limit:.0f}s)")


def test_criterion_1_mean_family_reduction():
    """G_(r,0) equals the r-th power mean on 1e4 random instances."""
    rng = rng_for(1001)
    t0 = time.perf_counter()
    worst = 0.0
    per_n = 10_000 // 5
    for n in range(2, 7):
        lam = rng.uniform(0.1, 1.0, n)
        w = Weights(lam)
        for _ in range(per_n // 100):
            r = float(rng.uniform(-5.0, 5.0))
            x = np.exp(rng.uniform(-6.0, 6.0, (100, n)))
            g = gini_mean(P(r, 0.0), w, x)
            h = power_mean(r, w, x)
            worst = max(worst, float(np.max(np.abs(g - h) / np.abs(h))))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12
    assert elapsed < 1.0
    report("criterion 1 (mean-family reduction)", elapsed, 1,
           f"10000 instances, max rel err {worst:.2e}")


def test_criterion_2_diagonal_derivative_suite():
    """Closed-form diagonal partials vs central finite differences."""
    rng = rng_for(1002)
    t0 = time.perf_counter()
    worst = 0.0

    def check_spec(spec, t):
        nonlocal worst
        from meanineq import bajraktarevic_mean

        n = spec.n
        first = diag_first_partials(spec, t)
        second = diag_second_partials(spec, t)
        h1 = 1e-5 * max(1.0, abs(t))
        h2 = 1e-4 * max(1.0, abs(t))
        base = np.full(n, t)

        def at(bumps):
            x = base.copy()
            for ell, dv in bumps:
                x[ell] += dv
            return bajraktarevic_mean(spec, x)

        f0 = at([])
        for ell in range(n):
            fd = (at([(ell, h1)]) - at([(ell, -h1)])) / (2.0 * h1)
            worst = max(worst, abs(first[ell] - fd) / max(1.0, abs(first[ell])))
        for ell in range(n):
            fd = (at([(ell, h2)]) - 2.0 * f0 + at([(ell, -h2)])) / h2**2
            worst = max(worst, abs(second[ell, ell] - fd) / max(1.0, abs(second[ell, ell])))
            for m in range(ell + 1, n):
                fd = (
                    at([(ell, h2), (m, h2)])
                    - at([(ell, h2), (m, -h2)])
                    - at([(ell, -h2), (m, h2)])
                    + at([(ell, -h2), (m, -h2)])
                ) / (4.0 * h2 * h2)
                worst = max(worst, abs(second[ell, m] - fd) / max(1.0, abs(second[ell, m])))

    for _ in range(200):
        n = int(rng.integers(2, 5))
        mean = GiniMean(P(*rng.uniform(-3, 3, 2)), Weights(rng.uniform(0.1, 1, n)))
        check_spec(gini_as_bajraktarevic(mean), float(np.exp(rng.uniform(-1, 1))))
    for _ in range(50):
        n = int(rng.integers(2, 5))
        spec = smooth_custom_spec(rng, n)
        check_spec(spec, float(rng.uniform(0.8, 2.5)))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-5
    assert elapsed < 10.0
    report("criterion 2 (diagonal derivative suite)", elapsed, 10,
           f"200 two-parameter + 50 custom specs, max rel err {worst:.2e}")


def test_criterion_3_psd_oracle_equivalence():
    """Closed-form shifted-diagonal classes vs Jacobi eigenvalues, 1e5 cases."""
    rng = rng_for(1003)
    t0 = time.perf_counter()
    total = 100_000
    adversarial = 10_000
    disagreements = 0
    checked = 0
    for k in range(2, 9):
        m = (total - adversarial) // 7
        c0 = rng.uniform(-5, 5, m)
        c = rng.uniform(-5, 5, (m, k))
        # adversarial band: one negative entry tuned so the reciprocal sum
        # lands within [-1e-6, 1e-6]
        ma = adversarial // 7
        ca = rng.uniform(0.2, 5.0, (ma, k))
        delta = rng.uniform(-1e-6, 1e-6, ma)
        c0a = 1.0 / (delta - (1.0 / ca).sum(axis=1))
        c0_all = np.concatenate([c0, c0a])
        c_all = np.vstack([c, ca])
        closed = classify_shifted_diagonal_batch(c0_all, c_all)
        mats = np.zeros((c_all.shape[0], k, k))
        idx = np.arange(k)
        mats[:, idx, idx] = c_all
        mats += c0_all[:, None, None]
        vals = kernels.eigvals_sym_batch(mats)
        lam_min = vals[:, 0]
        scale = np.maximum(1.0, np.abs(vals).max(axis=1))
        eig_cls = np.full(c_all.shape[0], kernels.INDEFINITE, dtype=np.int64)
        eig_cls[lam_min >= -1e-9 * scale] = kernels.PSD_ONLY
        eig_cls[lam_min > 1e-9 * scale] = kernels.PD
        mismatch = closed != eig_cls
        outside_band = np.abs(lam_min) > 1e-9 * scale
        disagreements += int(np.sum(mismatch & outside_band))
        checked += c_all.shape[0]
    elapsed = time.perf_counter() - t0
    assert checked >= 99_000
    assert disagreements == 0
    assert elapsed < 30.0
    report("criterion 3 (psd oracle equivalence)", elapsed, 30,
           f"{checked} instances incl. adversarial band, 0 disagreements")


def test_criterion_4_classical_reproductions():
    """Power-mean subadditivity and conjugate-exponent product inequality."""
    t0 = time.perf_counter()
    budget = 100_000
    for i, p in enumerate([0.25, 0.5, 0.99, 1.0, 1.5, 2.0, 3.0]):
        verdict = decide_minkowski_global([P(p, 0.0)] * 3)
        problem = power_minkowski(p)
        found = search_global(problem, budget=budget, seed=100 + i)
        if p >= 1.0:
            assert verdict.klass is GlobalClass.HOLDS_GLOBAL, p
            assert found is None, p
        else:
            assert verdict.klass is GlobalClass.FAILS_GLOBAL, p
            assert found is not None and found.gap < -1e-6, p
    for j, (p, q) in enumerate([(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0)]):
        verdict = decide_hoelder_global([P(-1.0, 0.0), P(p, 0.0), P(q, 0.0)])
        assert verdict.klass is GlobalClass.HOLDS_GLOBAL, (p, q)
        (ssum,) = verdict.probe["reciprocal_sums"]
        assert abs(ssum) <= 1e-12, (p, q)
        found = search_global(conjugate_hoelder(p, q), budget=budget, seed=200 + j)
        assert found is None, (p, q)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    report("criterion 4 (classical reproductions)", elapsed, 60,
           "7 subadditivity exponents + 3 conjugate pairs at budget 1e5")


def test_criterion_5_local_trichotomy_agreement():
    """Exact local decisions vs the grid scan on 1e3 random bounded cases,
    with search confirmation of every failed necessary condition."""
    rng = rng_for(1005)
    t0 = time.perf_counter()
    contradictions = 0
    scan_vs_sufficient = 0
    fails = []
    for _ in range(1000):
        k = int(rng.integers(2, 4))
        gammas = rng.uniform(-2.0, 3.0, k + 1)
        lo = rng.uniform(0.1, 2.0, k)
        box = tuple(
            Interval(float(a), float(a + b))
            for a, b in zip(lo, rng.uniform(0.5, 4.0, k))
        )
        decider = decide_minkowski_local(gammas, box)
        params = [((g + 1.0) / 2.0, (g + 1.0) / 2.0) for g in gammas]
        problem = gini_problem(params, np.full(2, 0.5), "sum", box=box)
        spec = GammaSpec.from_problem(problem)
        verdict = local_scan(spec, grid=9)
        pair = {decider.klass, verdict.klass}
        if pair == {LocalClass.NECESSARY_FAILS, LocalClass.SUFFICIENT_HOLDS}:
            contradictions += 1
        _, classes, _ = scan_gamma_grid(spec, 9)
        if (
            np.any(classes == kernels.INDEFINITE)
            and decider.klass is LocalClass.SUFFICIENT_HOLDS
        ):
            scan_vs_sufficient += 1
        if decider.klass is LocalClass.NECESSARY_FAILS:
            fails.append((problem, decider.witness))
    assert contradictions == 0
    assert scan_vs_sufficient == 0

    confirmed = 0
    for problem, witness in fails:
        y = witness.y
        margin = min(
            min(y[j] - iv.lo, iv.hi - y[j]) for j, iv in enumerate(problem.box)
        )
        radius = 0.5 * margin
        cex = search_local(problem, y, radius=radius, budget=10_000)
        if cex is not None:
            confirmed += 1
    elapsed = time.perf_counter() - t0
    assert len(fails) > 0
    assert confirmed >= math.ceil(0.95 * len(fails))
    report("criterion 5 (local trichotomy)", elapsed, 120,
           f"1000 cases, 0 contradictions, {confirmed}/{len(fails)} failures confirmed")


def test_criterion_6_concavity_probe_equivalence():
    """Sign-adjusted reparametrized-map Hessians vs curvature matrices."""
    rng = rng_for(1006)
    t0 = time.perf_counter()
    mismatches = 0
    for trial in range(50):
        kind = "sum" if trial % 2 == 0 else "product"
        params = [tuple(rng.uniform(-2, 3, 2)) for _ in range(3)]
        problem = gini_problem(params, rng.uniform(0.2, 1.0, 2), kind,
                               box=(Interval(0.3, 4.0),) * 2)
        spec = GammaSpec.from_problem(problem)
        sign = psi_probe_sign(spec)
        for _ in range(20):
            y = rng.uniform(0.5, 3.5, 2)
            gam = gamma_at(spec, y)
            hess = sign * build_psi_probe(spec, y)
            gv, _ = jacobi_eigh(0.5 * (gam + gam.T))
            hv, _ = jacobi_eigh(0.5 * (hess + hess.T))
            g_scale = max(1.0, float(np.abs(gv).max()))
            h_scale = max(1.0, float(np.abs(hv).max()))
            g_psd = gv[0] >= -1e-6 * g_scale
            h_nsd = hv[-1] <= 1e-6 * h_scale
            decisive = (
                abs(gv[0]) > 1e-6 * g_scale and abs(hv[-1]) > 1e-6 * h_scale
            )
            if decisive and g_psd != h_nsd:
                mismatches += 1
    elapsed = time.perf_counter() - t0
    assert mismatches == 0
    assert elapsed < 10.0
    report("criterion 6 (concavity probe equivalence)", elapsed, 10,
           "50 problems x 20 points, 0 mismatches at 1e-6*scale")


def test_criterion_7_diagonal_deficiency_zero():
    """Deficiency vanishes at random diagonal points for every coupling."""
    rng = rng_for(1007)
    t0 = time.perf_counter()
    problems = [
        gini_problem([(2, 0), (1.5, 0.5), (3, -1)], [0.4, 0.6], "sum"),
        gini_problem([(2.5, -0.5), (1.5, 1.5), (2, 0)], [0.3, 0.7], "sum",
                     box=(Interval(0.2, 6.0),) * 2),
        gini_problem([(1, 0), (2, 0), (2, 0)], [0.5, 0.5], "product"),
        gini_problem([(0.5, 0.5), (2, -1), (1, 1)], [0.25, 0.75], "product",
                     box=(Interval(0.3, 3.0),) * 2),
        custom_phi_problem(),
    ]
    worst = 0.0
    count = 0
    for problem in problems:
        for _ in range(200):
            y = np.array(
                [
                    rng.uniform(max(iv.lo, 0.4) + 0.05, min(iv.hi, 2.8) - 0.05)
                    for iv in problem.box
                ]
            )
            val = abs(deficiency(problem, diagonal_matrix(y, problem.n)))
            worst = max(worst, val)
            count += 1
    elapsed = time.perf_counter() - t0
    assert count == 1000
    assert worst <= 1e-10
    report("criterion 7 (diagonal deficiency)", elapsed, 30,
           f"1000 diagonal points over 5 couplings, max |F| {worst:.2e}")
