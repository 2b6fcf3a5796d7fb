"""Counterexample search for the coupled inequality.

``search_local`` perturbs a diagonal point at shrinking scales, seeding
along a direction of negative curvature when one is available, and returns
the first matrix with negative deficiency.  ``search_global`` mixes
log-uniform sampling over the box with coordinate-descent polishing of the
worst sample.  Every returned witness is re-certified through a fresh
``diagcalc.deficiency`` evaluation, never through the search path's cached
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .diagcalc import (
    InequalityProblem,
    deficiency,
    deficiency_parts,
    diagonal_matrix,
)
from .errors import CapabilityError, ConstructionError, ContractError, DomainError
from .local import GammaSpec, gamma_at
from .means import GiniMean
from .psd import jacobi_eigh

#: A deficiency below -max(VIOLATION_ABS_TOL, 1e-12 * side scale) violates.
VIOLATION_ABS_TOL = 1e-9

#: Log-range caps for sampling axes whose interval ends are 0 or infinite.
SAMPLE_LOG_RANGE = 3.0

_BATCH = 4096
_SHRINK_SCALES = 24


@dataclass(frozen=True)
class Counterexample:
    """A violating matrix with both inequality sides, the (negative) gap
    rhs - lhs, and its distance to the nearest constant-column matrix."""

    x: np.ndarray
    lhs: float
    rhs: float
    gap: float
    distance_to_diagonal: float


def diagonal_distance(x: np.ndarray) -> float:
    """Euclidean distance from x to the set of constant-column matrices."""
    dev = x - x.mean(axis=0, keepdims=True)
    return float(np.sqrt((dev * dev).sum()))


def _violation_cut(lhs: float, rhs: float) -> float:
    return -max(VIOLATION_ABS_TOL, 1e-12 * max(abs(lhs), abs(rhs)))


def certify(problem: InequalityProblem, x: np.ndarray) -> Counterexample | None:
    """Fresh evaluation of both sides; a Counterexample when x violates."""
    lhs, rhs = deficiency_parts(problem, x)
    gap = rhs - lhs
    if gap < _violation_cut(lhs, rhs):
        return Counterexample(
            x=np.array(x, dtype=float),
            lhs=lhs,
            rhs=rhs,
            gap=gap,
            distance_to_diagonal=diagonal_distance(np.asarray(x, dtype=float)),
        )
    return None


def _batch_evaluator(problem: InequalityProblem):
    means = [problem.left, *problem.right]
    if all(isinstance(m, GiniMean) for m in means) and problem.phi.kind in (
        "sum",
        "product",
    ):
        rs = np.array([[m.params.r, m.params.s] for m in means])
        lams = np.vstack([m.weights.lam for m in means])
        kind = 0 if problem.phi.kind == "sum" else 1

        def fast(xb: np.ndarray) -> np.ndarray:
            return kernels.deficiency_gini_batch(kind, rs, lams, xb)

        return fast

    def slow(xb: np.ndarray) -> np.ndarray:
        return np.array([deficiency(problem, x) for x in xb])

    return slow


def _sample_bounds(problem: InequalityProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-axis sampling bounds: finite interval ends are kept, ends at 0 or
    infinity are capped so coupled values stay within a few orders of one
    (the means are homogeneous, so no violation is lost by rescaling)."""
    k = problem.k
    span = SAMPLE_LOG_RANGE / k if problem.phi.kind == "product" else SAMPLE_LOG_RANGE
    lo = np.empty(k)
    hi = np.empty(k)
    log_axis = np.empty(k, dtype=bool)
    for j, iv in enumerate(problem.box):
        if iv.is_positive:
            log_axis[j] = True
            lo[j] = iv.lo if iv.lo > 0.0 else 10.0 ** (-span)
            hi[j] = iv.hi if math.isfinite(iv.hi) else 10.0**span
            if lo[j] >= hi[j]:
                lo[j], hi[j] = iv.finite_bounds(geometric=True)
        else:
            log_axis[j] = False
            lo[j], hi[j] = iv.finite_bounds(geometric=False)
    return lo, hi, log_axis


def _sample_matrices(rng, problem, lo, hi, log_axis, count: int) -> np.ndarray:
    n, k = problem.n, problem.k
    u = rng.random((count, n, k))
    out = np.empty((count, n, k))
    for j in range(k):
        if log_axis[j]:
            llo, lhi = math.log(lo[j]), math.log(hi[j])
            out[:, :, j] = np.exp(llo + u[:, :, j] * (lhi - llo))
        else:
            out[:, :, j] = lo[j] + u[:, :, j] * (hi[j] - lo[j])
    return out


def search_local(
    problem: InequalityProblem,
    center,
    radius: float,
    budget: int,
    seed: int = 0,
) -> Counterexample | None:
    """Search for a violation near the diagonal point over ``center``.

    Perturbations are drawn at shrinking scales radius * 2**-m.  When the
    curvature matrix at the center is indefinite, the first probes run along
    its negative direction (an outer product with a zero-sum row pattern),
    which the second-order expansion of the deficiency predicts to violate.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    n, k = problem.n, problem.k
    base = diagonal_matrix(center, n)
    if not problem.contains_matrix(base):
        raise DomainError("center is not inside the box")
    evaluate = _batch_evaluator(problem)
    evals_left = int(budget)
    if evals_left <= 0:
        return None

    direction = None
    try:
        spec = GammaSpec.from_problem(problem)
        gamma = gamma_at(spec, center)
        vals, vecs = jacobi_eigh(gamma)
        if vals[0] < -1e-12 * max(1.0, float(np.abs(vals).max())):
            direction = vecs[:, 0]
    except (ConstructionError, CapabilityError):
        direction = None

    if direction is not None:
        row = np.zeros(n)
        row[0], row[1] = 1.0, -1.0
        row /= math.sqrt(2.0)
        bump = np.outer(row, direction)
        for m in range(_SHRINK_SCALES):
            rho = radius * 2.0**-m
            for sign in (1.0, -1.0):
                if evals_left <= 0:
                    return None
                x = base + sign * rho * bump
                if not problem.contains_matrix(x):
                    continue
                gap = float(evaluate(x[None])[0])
                evals_left -= 1
                if gap < -VIOLATION_ABS_TOL:
                    found = certify(problem, x)
                    if found is not None:
                        return found

    rng = np.random.default_rng(seed)
    scale_idx = 0
    dry_batches = 0
    while evals_left > 0:
        rho = radius * 2.0 ** (-(scale_idx % _SHRINK_SCALES))
        scale_idx += 1
        b = min(256, evals_left)
        eta = rng.uniform(-1.0, 1.0, (b, n, k))
        xb = base[None] + rho * eta
        inside = np.ones(b, dtype=bool)
        for j, iv in enumerate(problem.box):
            inside &= np.all((xb[:, :, j] > iv.lo) & (xb[:, :, j] < iv.hi), axis=1)
        if not inside.any():
            # a center squeezed against the boundary can reject whole
            # batches without spending budget; cap the dry spins
            dry_batches += 1
            if dry_batches >= 8 * _SHRINK_SCALES:
                return None
            continue
        dry_batches = 0
        xs = xb[inside]
        gaps = evaluate(xs)
        evals_left -= xs.shape[0]
        hits = np.flatnonzero(gaps < -VIOLATION_ABS_TOL)
        for h in hits:
            found = certify(problem, xs[h])
            if found is not None:
                return found
    return None


def search_global(
    problem: InequalityProblem, budget: int, seed: int
) -> Counterexample | None:
    """Box-wide violation search: log-uniform sampling (80% of the budget)
    followed by coordinate descent from the worst sample.  Deterministic for
    fixed (problem, budget, seed); returns the best violating witness."""
    if budget <= 0:
        return None
    evaluate = _batch_evaluator(problem)
    rng = np.random.default_rng(seed)
    lo, hi, log_axis = _sample_bounds(problem)
    n, k = problem.n, problem.k

    n_sample = max(1, int(budget * 0.8))
    n_refine = budget - n_sample
    best_x = None
    best_gap = math.inf
    remaining = n_sample
    while remaining > 0:
        b = min(_BATCH, remaining)
        remaining -= b
        xb = _sample_matrices(rng, problem, lo, hi, log_axis, b)
        gaps = evaluate(xb)
        i = int(np.argmin(gaps))
        if gaps[i] < best_gap:
            best_gap = float(gaps[i])
            best_x = xb[i].copy()

    if best_x is not None and n_refine > 0:
        best_x, best_gap = _coordinate_descent(
            evaluate, best_x, best_gap, lo, hi, log_axis, n_refine
        )

    if best_x is None or best_gap >= -VIOLATION_ABS_TOL:
        return None
    return certify(problem, best_x)


def _coordinate_descent(evaluate, x, gap, lo, hi, log_axis, budget):
    n, k = x.shape
    step = 0.5  # relative (log-space) step, halved on stalls
    evals = budget
    while evals > 0 and step > 1e-8:
        improved = False
        floor = max(1e-13, 1e-9 * abs(gap))  # ignore sub-noise improvements
        for i in range(n):
            for j in range(k):
                for sign in (1.0, -1.0):
                    if evals <= 0:
                        return x, gap
                    cand = x.copy()
                    if log_axis[j]:
                        cand[i, j] = min(
                            max(x[i, j] * math.exp(sign * step), lo[j] * (1 + 1e-12)),
                            hi[j] * (1 - 1e-12),
                        )
                    else:
                        width = hi[j] - lo[j]
                        cand[i, j] = min(
                            max(x[i, j] + sign * step * width, lo[j] + 1e-12 * width),
                            hi[j] - 1e-12 * width,
                        )
                    g = float(evaluate(cand[None])[0])
                    evals -= 1
                    if g < gap - floor:
                        x, gap = cand, g
                        improved = True
                        break
        if not improved:
            step *= 0.5
    return x, gap


def shrink(problem: InequalityProblem, witness: Counterexample) -> Counterexample:
    """Greedily pull witness entries toward their column means while the
    violation persists; the result never increases the diagonal distance."""
    lhs, rhs = deficiency_parts(problem, witness.x)
    if rhs - lhs >= _violation_cut(lhs, rhs):
        raise ContractError("shrink requires a violating witness")
    evaluate = _batch_evaluator(problem)
    x = np.array(witness.x, dtype=float)
    thetas = [2.0**-e for e in range(21)]  # 1, 1/2, ..., ~1e-6
    # accept slightly below the certification cut so the final fresh
    # evaluation cannot disagree by rounding
    accept = -1.02 * VIOLATION_ABS_TOL
    for _ in range(200):
        moved = False
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                target = x[:, j].mean()
                delta = target - x[i, j]
                if abs(delta) <= 1e-12 * max(1.0, abs(target)):
                    continue
                for theta in thetas:
                    cand = x.copy()
                    cand[i, j] = x[i, j] + theta * delta
                    if not problem.contains_matrix(cand):
                        continue
                    if float(evaluate(cand[None])[0]) < accept:
                        x = cand
                        moved = True
                        break
        if not moved:
            break
    found = certify(problem, x)
    if found is None:  # pragma: no cover - certify uses the same tolerance
        return witness
    return found
