"""Global validity of the coupled inequality.

Two routes are implemented.  The grid checkers probe the pointwise
sufficient condition (a chi-subadditivity statement after reduction to
two-parameter means) on finite grids; a clean sweep certifies global
validity at the probed resolution.  The exact deciders implement the known
parameter characterizations for sum coupling (two-variable and any-n) and
product coupling on the positive orthant; they are equivalences, so a
failed clause means the inequality genuinely fails globally.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .diagcalc import InequalityProblem
from .errors import ShapeError
from .means import GiniMean, GiniParams, Interval
from .local import box_grid

#: A probe fails when rhs - lhs < -PROBE_REL_TOL * max(1, |lhs|, |rhs|).
PROBE_REL_TOL = 1e-9

#: Reciprocal sums within this relative band of zero count as equality.
RECIPROCAL_BAND = 1e-12

#: Default log-range for curvature-function grids on the positive orthant.
DEFAULT_Z_LO = 1e-3
DEFAULT_Z_HI = 1e3

#: Default resolutions: points per z-axis and per simplex axis.
DEFAULT_Z_GRID = 33
DEFAULT_SIMPLEX_GRID = 9

_SURJECTIVITY_NOTE = (
    "unverified assumption: the custom coupling map is onto its declared codomain"
)


class GlobalClass(enum.Enum):
    HOLDS_GLOBAL = "holds_global"
    FAILS_GLOBAL = "fails_global"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GlobalVerdict:
    """Outcome of a global test; ``probe`` carries the failing grid point of
    an inconclusive check or the failed clause data of an exact decider."""

    klass: GlobalClass
    evidence: str
    probe: dict | None = None


def _margin_ok(lhs, rhs) -> np.ndarray:
    band = PROBE_REL_TOL * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return rhs - lhs >= -band


def _check_params(params: Sequence[GiniParams], k_min: int = 3) -> list[GiniParams]:
    ps = list(params)
    if len(ps) < k_min:
        raise ShapeError("need the outer parameter pair plus k >= 2 inner pairs")
    return ps


def _chi(params: GiniParams, t: np.ndarray) -> np.ndarray:
    return kernels.chi_batch(float(params.r), float(params.s), np.asarray(t, dtype=float))


def check_pointwise_sufficient(problem: InequalityProblem, grid: int = 12) -> GlobalVerdict:
    """Probe the pointwise sufficient condition on all (u, y) grid pairs.

    The condition compares the outer mean's normalized generator increment
    at the coupled points against the coupling-gradient-weighted sum of the
    inner means' increments.  A clean sweep certifies global validity at
    this resolution; a failing pair is only inconclusive, since the
    condition is sufficient but not necessary.
    """
    pts = box_grid(problem.box, grid)
    npts = pts.shape[0]
    means = [problem.left, *problem.right]
    all_gini = all(isinstance(m, GiniMean) for m in means)
    phi_vals = np.array([problem.phi.value(y) for y in pts])
    grads = np.stack([problem.phi.grad(y) for y in pts])

    if all_gini:
        # normalized increment of a two-parameter mean is u * chi(y/u)
        ratio = phi_vals[None, :] / phi_vals[:, None]
        lhs = phi_vals[:, None] * _chi(problem.left.params, ratio.ravel()).reshape(
            npts, npts
        )
        rhs = np.zeros((npts, npts))
        for j in range(problem.k):
            zr = pts[None, :, j] / pts[:, None, j]
            term = _chi(problem.right[j].params, zr.ravel()).reshape(npts, npts)
            rhs += (grads[:, j] * pts[:, j])[:, None] * term
    else:
        lhs = np.empty((npts, npts))
        rhs = np.empty((npts, npts))
        for a in range(npts):
            u = pts[a]
            phi_u = phi_vals[a]
            gu = grads[a]
            lhs[a] = [_increment_term(problem.left, phi_u, phi_vals[b]) for b in range(npts)]
            for b in range(npts):
                rhs[a, b] = sum(
                    gu[j] * _increment_term(problem.right[j], u[j], pts[b, j])
                    for j in range(problem.k)
                )

    ok = _margin_ok(lhs, rhs)
    notes = f"; {_SURJECTIVITY_NOTE}" if problem.phi.kind == "custom" else ""
    if ok.all():
        return GlobalVerdict(
            klass=GlobalClass.HOLDS_GLOBAL,
            evidence=(
                f"pointwise sufficient condition passed at all {npts * npts} "
                f"(u, y) grid pairs; grid-certified at resolution {grid} per axis"
                + notes
            ),
        )
    a, b = np.argwhere(~ok)[0]
    return GlobalVerdict(
        klass=GlobalClass.INCONCLUSIVE,
        evidence=(
            "pointwise sufficient condition fails at a grid pair; "
            "the condition is not necessary, so no global verdict" + notes
        ),
        probe={
            "u": pts[a].tolist(),
            "y": pts[b].tolist(),
            "lhs": float(lhs[a, b]),
            "rhs": float(rhs[a, b]),
        },
    )


def _increment_term(mean, u: float, y: float) -> float:
    if isinstance(mean, GiniMean):
        t = np.array([y / u])
        return float(u * _chi(mean.params, t)[0])
    return mean.p0(y) * (mean.f(y) - mean.f(u)) / (mean.p0(u) * mean.f_deriv(u))


def simplex_grid(k: int, m: int) -> np.ndarray:
    """Nonnegative weight vectors summing to one, m points per free axis."""
    if k == 1:
        return np.ones((1, 1))
    axis = np.linspace(0.0, 1.0, m)
    rows = []
    for head in itertools.product(axis, repeat=k - 1):
        s = sum(head)
        if s <= 1.0 + 1e-12:
            rows.append((*head, max(0.0, 1.0 - s)))
    return np.array(rows)


def _log_grid(lo: float, hi: float, m: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), m))


def check_pointwise_minkowski(
    params: Sequence[GiniParams],
    grid: int = DEFAULT_Z_GRID,
    z_lo: float = DEFAULT_Z_LO,
    z_hi: float = DEFAULT_Z_HI,
    simplex: int = DEFAULT_SIMPLEX_GRID,
) -> GlobalVerdict:
    """Probe chi_{outer}(sum t_j z_j) <= sum t_j chi_j(z_j) on a log grid of
    z over [z_lo, z_hi]^k and a simplex grid of t.

    A clean sweep certifies the sum-coupled inequality globally on the whole
    positive orthant at this resolution.
    """
    ps = _check_params(params)
    k = len(ps) - 1
    res = min(grid, max(3, int(round(2e5 ** (1.0 / k)))))
    axes = [_log_grid(z_lo, z_hi, res)] * k
    chi_axes = [_chi(ps[j + 1], axes[j]) for j in range(k)]
    mesh = np.meshgrid(*axes, indexing="ij")
    z = np.stack([m.ravel() for m in mesh], axis=1)
    chi_mesh = np.meshgrid(*chi_axes, indexing="ij")
    chi_z = np.stack([m.ravel() for m in chi_mesh], axis=1)
    tgrid = simplex_grid(k, simplex)
    for ti, t in enumerate(tgrid):
        lhs = _chi(ps[0], z @ t)
        rhs = chi_z @ t
        ok = _margin_ok(lhs, rhs)
        if not ok.all():
            b = int(np.flatnonzero(~ok)[0])
            return GlobalVerdict(
                klass=GlobalClass.INCONCLUSIVE,
                evidence=(
                    "curvature-function subadditivity fails at a probe; "
                    "the condition is sufficient only, no global verdict"
                ),
                probe={
                    "z": z[b].tolist(),
                    "t": t.tolist(),
                    "lhs": float(lhs[b]),
                    "rhs": float(rhs[b]),
                },
            )
    return GlobalVerdict(
        klass=GlobalClass.HOLDS_GLOBAL,
        evidence=(
            f"curvature-function subadditivity passed on z in [{z_lo:g}, {z_hi:g}]^{k} "
            f"({res} log points per axis, {len(tgrid)} simplex weights); "
            "grid-certified for the whole positive orthant"
        ),
    )


def ratio_interval(iv: Interval) -> Interval:
    """The quotient set I/I = (lo/hi, hi/lo) in extended reals."""
    lo = iv.lo / iv.hi if math.isfinite(iv.hi) else 0.0
    if iv.lo > 0.0:
        hi = iv.hi / iv.lo
    else:
        hi = math.inf
    return Interval(lo, hi)


def check_pointwise_hoelder(
    params: Sequence[GiniParams],
    ratio_boxes: Sequence[Interval],
    grid: int = DEFAULT_Z_GRID,
) -> GlobalVerdict:
    """Probe chi_{mirrored outer}(prod z_j) <= sum chi_j(z_j) with z_j
    ranging over log grids of the per-axis quotient sets.

    ``params`` follow the mirrored-outer convention of the product-form
    results: the left-hand mean of the inequality is the Gini mean with
    parameters (-r0, -s0).
    """
    ps = _check_params(params)
    k = len(ps) - 1
    if len(ratio_boxes) != k:
        raise ShapeError("need one ratio interval per inner mean")
    res = min(grid, max(3, int(round(2e5 ** (1.0 / k)))))
    axes = []
    for rb in ratio_boxes:
        lo = rb.lo if rb.lo > 0.0 else DEFAULT_Z_LO
        hi = rb.hi if math.isfinite(rb.hi) else DEFAULT_Z_HI
        if lo >= hi:
            axes.append(rb.interior_points(res, geometric=True))
        else:
            axes.append(_log_grid(lo, hi, res))
    chi_axes = [_chi(ps[j + 1], axes[j]) for j in range(k)]
    mesh = np.meshgrid(*axes, indexing="ij")
    z = np.stack([m.ravel() for m in mesh], axis=1)
    chi_mesh = np.meshgrid(*chi_axes, indexing="ij")
    rhs = np.stack([m.ravel() for m in chi_mesh], axis=1).sum(axis=1)
    mirrored = GiniParams(-ps[0].r, -ps[0].s)
    lhs = _chi(mirrored, z.prod(axis=1))
    ok = _margin_ok(lhs, rhs)
    if ok.all():
        return GlobalVerdict(
            klass=GlobalClass.HOLDS_GLOBAL,
            evidence=(
                f"product-form curvature condition passed at {z.shape[0]} probes "
                f"({res} log points per ratio axis); grid-certified"
            ),
        )
    b = int(np.flatnonzero(~ok)[0])
    return GlobalVerdict(
        klass=GlobalClass.INCONCLUSIVE,
        evidence=(
            "product-form curvature condition fails at a probe; "
            "the condition is sufficient only, no global verdict"
        ),
        probe={"z": z[b].tolist(), "lhs": float(lhs[b]), "rhs": float(rhs[b])},
    )


def decide_minkowski_2var(params: Sequence[GiniParams]) -> GlobalVerdict:
    """Exact global decision for the two-variable (n = 2) sum-coupled
    inequality on the positive orthant.

    Holds iff (i) every inner exponent is nonnegative, (ii) min(r0, s0) is
    at most min(1, inner exponents), and (iii) max(1, r0 + s0) is at most
    every inner exponent sum.
    """
    ps = _check_params(params)
    inner = ps[1:]
    inner_min = min(min(p.r, p.s) for p in inner)
    c1 = 0.0 <= inner_min
    c2 = min(ps[0].r, ps[0].s) <= min(1.0, inner_min)
    lhs3 = max(1.0, ps[0].r + ps[0].s)
    rhs3 = min(p.r + p.s for p in inner)
    c3 = lhs3 <= rhs3
    detail = {
        "inner_min": inner_min,
        "outer_min": min(ps[0].r, ps[0].s),
        "sum_bound": [lhs3, rhs3],
    }
    if c1 and c2 and c3:
        return GlobalVerdict(
            klass=GlobalClass.HOLDS_GLOBAL,
            evidence="two-variable characterization: clauses (i)-(iii) all hold",
            probe=detail,
        )
    failed = [
        name
        for name, ok in (("(i)", c1), ("(ii)", c2), ("(iii)", c3))
        if not ok
    ]
    return GlobalVerdict(
        klass=GlobalClass.FAILS_GLOBAL,
        evidence=(
            f"two-variable characterization: clause {', '.join(failed)} fails; "
            "a violating instance exists (see counterexample search)"
        ),
        probe=detail,
    )


def decide_minkowski_global(params: Sequence[GiniParams]) -> GlobalVerdict:
    """Exact global decision for the sum-coupled inequality simultaneously
    for every variable count n.

    Holds iff (i) every inner exponent is nonnegative, (ii) min(r0, s0) is
    at most min(1, inner exponents), and (iii) max(1, r0, s0) is at most
    min over inner slots of max(r_j, s_j).  No characterization is known for
    a single fixed n between 2 and infinity; this decider settles the all-n
    statement.
    """
    ps = _check_params(params)
    inner = ps[1:]
    inner_min = min(min(p.r, p.s) for p in inner)
    c1 = 0.0 <= inner_min
    c2 = min(ps[0].r, ps[0].s) <= min(1.0, inner_min)
    lhs3 = max(1.0, ps[0].r, ps[0].s)
    rhs3 = min(max(p.r, p.s) for p in inner)
    c3 = lhs3 <= rhs3
    detail = {
        "inner_min": inner_min,
        "outer_min": min(ps[0].r, ps[0].s),
        "max_bound": [lhs3, rhs3],
    }
    if c1 and c2 and c3:
        return GlobalVerdict(
            klass=GlobalClass.HOLDS_GLOBAL,
            evidence=(
                "any-n characterization: clauses (i)-(iii) all hold "
                "(fixed-n variants between 2 and infinity have no known test)"
            ),
            probe=detail,
        )
    failed = [
        name for name, ok in (("(i)", c1), ("(ii)", c2), ("(iii)", c3)) if not ok
    ]
    return GlobalVerdict(
        klass=GlobalClass.FAILS_GLOBAL,
        evidence=(
            f"any-n characterization: clause {', '.join(failed)} fails; "
            "a violating instance exists (see counterexample search)"
        ),
        probe=detail,
    )


def decide_hoelder_global(params: Sequence[GiniParams]) -> GlobalVerdict:
    """Exact global decision for the product-coupled inequality on the
    positive orthant, any n, in the mirrored-outer convention.

    Holds iff every slot has max(r_i, s_i) >= 0 and, for every slot whose
    min(r_i, s_i) is negative, all other slots have max(r_j, s_j) > 0 and
    1/min(r_i, s_i) + sum_{j != i} 1/max(r_j, s_j) <= 0.
    """
    ps = _check_params(params)
    maxes = np.array([max(p.r, p.s) for p in ps])
    mins = np.array([min(p.r, p.s) for p in ps])
    if np.any(maxes < 0.0):
        i = int(np.flatnonzero(maxes < 0.0)[0])
        return GlobalVerdict(
            klass=GlobalClass.FAILS_GLOBAL,
            evidence=(
                f"slot {i} has both exponents negative (max {maxes[i]:.6g} < 0); "
                "a violating instance exists (see counterexample search)"
            ),
            probe={"slot": i, "max": float(maxes[i])},
        )
    sums = []
    for i in np.flatnonzero(mins < 0.0):
        others = np.delete(maxes, i)
        if np.any(others <= 0.0):
            return GlobalVerdict(
                klass=GlobalClass.FAILS_GLOBAL,
                evidence=(
                    f"slot {int(i)} has a negative exponent but another slot has "
                    "no positive exponent; a violating instance exists"
                ),
                probe={"slot": int(i)},
            )
        recs = np.concatenate([[1.0 / mins[i]], 1.0 / others])
        ssum = float(recs.sum())
        band = RECIPROCAL_BAND * float(np.abs(recs).max())
        sums.append(ssum)
        if ssum > band:
            return GlobalVerdict(
                klass=GlobalClass.FAILS_GLOBAL,
                evidence=(
                    f"reciprocal condition fails at slot {int(i)}: "
                    f"1/min + sum 1/max = {ssum:.6g} > 0; a violating instance exists"
                ),
                probe={"slot": int(i), "reciprocal_sum": ssum},
            )
    if sums:
        note = f"reciprocal sums {[f'{s:.6g}' for s in sums]} all <= 0"
    else:
        note = "no slot carries a negative exponent"
    return GlobalVerdict(
        klass=GlobalClass.HOLDS_GLOBAL,
        evidence=f"product-form characterization holds: {note}",
        probe={"reciprocal_sums": sums},
    )
