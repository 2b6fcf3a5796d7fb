"""Local validity of the coupled inequality near the diagonal.

The k x k curvature matrix Gamma(y) built from the coupling map and the
per-mean bracket 2 p0'/p0 + f''/f' is positive semidefinite wherever the
inequality holds locally, and pointwise positive definiteness of Gamma is
sufficient for local validity.  For two-parameter means with sum or product
coupling the semidefiniteness condition collapses to closed-form parameter
tests, implemented in ``decide_minkowski_local`` and ``decide_hoelder_local``.
``build_psi_probe`` numerically probes the equivalent concavity statement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels
from .diagcalc import InequalityProblem, weight_proportionality_check
from .errors import (
    CapabilityError,
    ConstructionError,
    DomainError,
    NumericError,
    ShapeError,
)
from .means import (
    BajraktarevicSpec,
    GiniMean,
    Interval,
    Weights,
    gini_convexifier,
    generator_sign,
)
from .psd import (
    DEFAULT_EIG_TOL,
    PsdClass,
    ShiftedDiagonal,
    classify_eigvals_batch,
    classify_shifted_diagonal,
    jacobi_eigh,
    negative_direction,
)

#: Shift parameters within this of zero are treated as exactly zero.
GAMMA_ZERO_TOL = 1e-12

#: Weight vectors of the k+1 means must agree to this sup-deviation.
COMMON_WEIGHT_TOL = 1e-9


class LocalClass(enum.Enum):
    SUFFICIENT_HOLDS = "sufficient_holds"
    NECESSARY_FAILS = "necessary_fails"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class LocalWitness:
    """Evidence point for a non-sufficient verdict: the probed y (when the
    verdict is tied to a point), the curvature matrix there, and, for a
    failed necessary condition, a direction of negative curvature."""

    y: np.ndarray | None
    gamma: np.ndarray | None
    direction: np.ndarray | None = None


@dataclass(frozen=True)
class LocalVerdict:
    klass: LocalClass
    summary: str
    witness: LocalWitness | None = None

    def __post_init__(self):
        if (self.witness is None) != (self.klass is LocalClass.SUFFICIENT_HOLDS):
            raise ConstructionError("witness is carried exactly by non-sufficient verdicts")


@dataclass(frozen=True)
class GammaSpec:
    """An inequality problem whose means all passed the weight
    proportionality test with one common weight vector."""

    problem: InequalityProblem
    lam: Weights

    @classmethod
    def from_problem(cls, problem: InequalityProblem, samples: int = 33) -> "GammaSpec":
        means = [problem.left, *problem.right]
        lams = []
        for idx, m in enumerate(means):
            w = weight_proportionality_check(m, samples)
            if w is None:
                raise ConstructionError(
                    f"mean {idx} has non-proportional weight functions"
                )
            lams.append(w.lam)
        ref = lams[0]
        for lam in lams[1:]:
            if np.abs(lam - ref).max() > COMMON_WEIGHT_TOL:
                raise ConstructionError("means do not share a common weight vector")
        return cls(problem=problem, lam=Weights(ref))

    @property
    def k(self) -> int:
        return self.problem.k


def curvature_bracket(mean) -> Callable[[float], float]:
    """The scalar map t -> 2 p0'(t)/p0(t) + f''(t)/f'(t) of a mean.

    For a two-parameter mean this is (r + s - 1)/t.
    """
    if isinstance(mean, GiniMean):
        coeff = mean.params.r + mean.params.s - 1.0
        return lambda t: coeff / t
    if not mean.has_second_order:
        raise CapabilityError("curvature bracket needs f'' and weight derivatives")

    def bracket(t: float, m: BajraktarevicSpec = mean) -> float:
        return 2.0 * m.p0_deriv(t) / m.p0(t) + m.f_second(t) / m.f_deriv(t)

    return bracket


def gamma_at(spec: GammaSpec, y) -> np.ndarray:
    """Curvature matrix at an interior point y of the box:

    Gamma_ij = -d_i d_j Phi - d_i Phi d_j Phi * bracket0(Phi(y))
               + delta_ij d_j Phi * bracket_j(y_j).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    problem = spec.problem
    if y.shape != (problem.k,):
        raise ShapeError(f"expected a point with {problem.k} coordinates")
    for j, iv in enumerate(problem.box):
        if not iv.contains(y[j]):
            raise DomainError(f"coordinate {j} outside its interval")
    phi = problem.phi
    phi_y = phi.value(y)
    g = phi.grad(y)
    h = phi.hess(y)
    b0 = curvature_bracket(problem.left)(phi_y)
    gamma = -h - np.outer(g, g) * b0
    for j in range(problem.k):
        gamma[j, j] += g[j] * curvature_bracket(problem.right[j])(y[j])
    return gamma


def _gini_exponent_pairs(problem: InequalityProblem) -> np.ndarray | None:
    means = [problem.left, *problem.right]
    if not all(isinstance(m, GiniMean) for m in means):
        return None
    return np.array([[m.params.r, m.params.s] for m in means])


def minkowski_gammas(problem: InequalityProblem) -> np.ndarray | None:
    """gamma_i = r_i + s_i - 1 for an all-Gini sum-coupled problem."""
    rs = _gini_exponent_pairs(problem)
    if rs is None or problem.phi.kind != "sum":
        return None
    return rs.sum(axis=1) - 1.0


def hoelder_gammas(problem: InequalityProblem) -> np.ndarray | None:
    """Shift parameters for an all-Gini product-coupled problem.

    The product-form results are stated for a mirrored outer mean, so the
    outer slot contributes -(r0 + s0) while inner slots contribute r_j + s_j.
    """
    rs = _gini_exponent_pairs(problem)
    if rs is None or problem.phi.kind != "product":
        return None
    g = rs.sum(axis=1)
    g[0] = -g[0]
    return g


def _sum_gamma_batch(gammas: np.ndarray, pts: np.ndarray) -> np.ndarray:
    # Gamma(y) = diag(gamma_i / y_i) - gamma_0 / sum(y)
    b, k = pts.shape
    out = np.empty((b, k, k))
    out[:] = (-gammas[0] / pts.sum(axis=1))[:, None, None]
    idx = np.arange(k)
    out[:, idx, idx] += gammas[1:][None, :] / pts
    return out


def _product_gamma_batch(gammas: np.ndarray, pts: np.ndarray) -> np.ndarray:
    # Gamma(y) = prod(y) / (y_i y_j) * (delta_ij gamma_j + gamma_0)
    b, k = pts.shape
    core = np.diag(gammas[1:]) + gammas[0]
    scale = pts.prod(axis=1)[:, None, None] / (pts[:, :, None] * pts[:, None, :])
    return scale * core[None, :, :]


def box_grid(box: Sequence[Interval], grid) -> np.ndarray:
    """Cartesian interior grid over the box, row-major, one row per point."""
    if isinstance(grid, int):
        grid = [grid] * len(box)
    if len(grid) != len(box) or any(g < 3 for g in grid):
        raise ShapeError("need a resolution >= 3 for every axis")
    axes = [iv.interior_points(g) for iv, g in zip(box, grid)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def scan_gamma_grid(
    spec: GammaSpec, grid=9, tol: float = DEFAULT_EIG_TOL
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Classify Gamma(y) at every grid point.

    Returns (points, integer psd classes, eigenvalue rows); points are in
    row-major order over the per-axis interior grids, so results are
    deterministic for a fixed grid regardless of evaluation order.
    """
    problem = spec.problem
    pts = box_grid(problem.box, grid)
    rs = _gini_exponent_pairs(problem)
    if rs is not None and problem.phi.kind == "sum":
        mats = _sum_gamma_batch(minkowski_gammas(problem), pts)
    elif rs is not None and problem.phi.kind == "product":
        mats = _product_gamma_batch(hoelder_gammas(problem), pts)
    else:
        mats = np.stack([gamma_at(spec, y) for y in pts])
    mats = 0.5 * (mats + np.swapaxes(mats, 1, 2))
    vals = kernels.eigvals_sym_batch(mats)
    classes = classify_eigvals_batch(vals, tol)
    return pts, classes, vals


def _scan_witness(spec: GammaSpec, pts, classes, vals, code) -> LocalWitness:
    hits = np.flatnonzero(classes == code)
    if code == kernels.INDEFINITE:
        # prefer the point with the deepest violation reachable by an
        # order-one perturbation that stays inside the box: the depth
        # scales like lambda_min * min(1, boundary distance)^2
        margin = np.full(hits.size, np.inf)
        for j, iv in enumerate(spec.problem.box):
            margin = np.minimum(margin, pts[hits, j] - iv.lo)
            if math.isfinite(iv.hi):
                margin = np.minimum(margin, iv.hi - pts[hits, j])
        score = vals[hits, 0] * np.minimum(1.0, margin) ** 2
        idx = int(hits[np.argmin(score)])
    else:
        idx = int(hits[0])
    y = pts[idx]
    gamma = gamma_at(spec, y)
    direction = None
    if code == kernels.INDEFINITE:
        _, vecs = jacobi_eigh(gamma)
        direction = vecs[:, 0]
    return LocalWitness(y=y, gamma=gamma, direction=direction)


def local_scan(spec: GammaSpec, grid=9) -> LocalVerdict:
    """Grid certificate for the curvature condition, combined with the exact
    parameter tests when the problem is all-Gini with sum or product
    coupling (the exact test decides, disagreements are reported).
    """
    problem = spec.problem
    pts, classes, vals = scan_gamma_grid(spec, grid)
    n_ind = int(np.sum(classes == kernels.INDEFINITE))
    n_psd = int(np.sum(classes == kernels.PSD_ONLY))
    counts = (
        f"grid {len(pts)} points: {len(pts) - n_ind - n_psd} definite, "
        f"{n_psd} semidefinite-only, {n_ind} indefinite"
    )
    if n_ind:
        scan_class = LocalClass.NECESSARY_FAILS
        scan_witness = _scan_witness(spec, pts, classes, vals, kernels.INDEFINITE)
    elif n_psd:
        scan_class = LocalClass.BOUNDARY
        scan_witness = _scan_witness(spec, pts, classes, vals, kernels.PSD_ONLY)
    else:
        scan_class = LocalClass.SUFFICIENT_HOLDS
        scan_witness = None

    decider = None
    mg = minkowski_gammas(problem)
    if mg is not None:
        decider = decide_minkowski_local(mg, problem.box)
    else:
        hg = hoelder_gammas(problem)
        if hg is not None:
            decider = decide_hoelder_local(hg)

    if decider is None:
        summary = f"{counts}; grid certificate only, no closed-form test applies"
        if problem.phi.kind == "custom":
            summary += (
                "; unverified assumption: the custom coupling map is onto "
                "its declared codomain"
            )
        return LocalVerdict(klass=scan_class, summary=summary, witness=scan_witness)

    agrees = decider.klass is scan_class
    note = "scan agrees" if agrees else f"scan saw {scan_class.value}, exact test decides"
    summary = f"{decider.summary}; {counts}; {note}"
    if decider.klass is LocalClass.SUFFICIENT_HOLDS:
        witness = None
    elif scan_witness is not None and scan_class is decider.klass:
        witness = scan_witness
    else:
        witness = decider.witness
    return LocalVerdict(klass=decider.klass, summary=summary, witness=witness)


def _g1plus_sides(gammas: np.ndarray, box: Sequence[Interval]) -> tuple[float, float]:
    """Extended-real sides of the interval inequality
    sum_{J+} (1/g_i - 1/g_0) sup I_i <= sum_{J-} (1/g_0 - 1/g_i) inf I_i."""
    inv0 = 1.0 / gammas[0]
    lhs = 0.0
    rhs = 0.0
    for i, g in enumerate(gammas[1:]):
        d = 1.0 / g - inv0
        if d > 0.0:
            sup = box[i].hi
            lhs = lhs + d * sup if math.isfinite(sup) else math.inf
        elif d < 0.0:
            rhs += (-d) * box[i].lo
    return lhs, rhs


def _minkowski_fail_witness(gammas: np.ndarray, box: Sequence[Interval]) -> LocalWitness:
    """A point with indefinite Gamma plus a negative direction, built by
    pushing toward the interval ends that maximize the reciprocal sum."""
    k = len(box)
    mids = np.array([iv.midpoint() for iv in box])
    candidates = [mids]
    inv0 = 1.0 / gammas[0] if abs(gammas[0]) > GAMMA_ZERO_TOL else None
    if inv0 is not None and np.all(np.abs(gammas[1:]) > GAMMA_ZERO_TOL):
        for frac in (1e-2, 1e-3, 1e-4, 1e-6):
            y = mids.copy()
            for i, iv in enumerate(box):
                d = 1.0 / gammas[i + 1] - inv0
                lo, hi = iv.finite_bounds(geometric=iv.is_positive)
                if d > 0.0:
                    y[i] = hi * (1.0 - frac) if iv.is_positive else hi - frac
                elif d < 0.0:
                    y[i] = lo * (1.0 + frac) if iv.is_positive else lo + frac
            candidates.append(y)
    # least aggressive indefinite candidate first: the midpoint leaves the
    # most room around the witness for perturbation search
    for y in candidates:
        sd = ShiftedDiagonal(c0=-gammas[0] / y.sum(), c=tuple(gammas[1:] / y))
        res = classify_shifted_diagonal(sd)
        if res.klass is PsdClass.INDEFINITE:
            return LocalWitness(
                y=y, gamma=sd.matrix(), direction=negative_direction(sd)
            )
    # necessary condition fails only beyond the capped grid range
    y = candidates[-1]
    sd = ShiftedDiagonal(c0=-gammas[0] / y.sum(), c=tuple(gammas[1:] / y))
    return LocalWitness(y=y, gamma=sd.matrix(), direction=None)


def decide_minkowski_local(gammas, box: Sequence[Interval]) -> LocalVerdict:
    """Exact local trichotomy for sum-coupled two-parameter means.

    ``gammas`` are the shifts r_i + s_i - 1, outer first.  The necessary
    condition is one of: (i) gamma_0 <= 0 <= min inner; (ii) all positive
    and the interval inequality; (iii) gamma_0 < 0 with exactly one negative
    inner shift, the rest positive, and the interval inequality.  Sufficiency
    additionally needs at most one zero in case (i), or some inner shift
    distinct from the outer one in cases (ii)/(iii).
    """
    g = np.asarray(gammas, dtype=float)
    if g.ndim != 1 or g.size < 3:
        raise ShapeError("need gamma_0 plus k >= 2 inner shifts")
    if len(box) != g.size - 1:
        raise ShapeError("need one interval per inner mean")
    g0 = g[0]
    gi = g[1:]
    zero0 = abs(g0) <= GAMMA_ZERO_TOL
    zeros_inner = np.abs(gi) <= GAMMA_ZERO_TOL

    if (g0 < -GAMMA_ZERO_TOL or zero0) and np.all(gi >= -GAMMA_ZERO_TOL):
        nzero = int(zero0) + int(zeros_inner.sum())
        if nzero <= 1:
            return LocalVerdict(
                klass=LocalClass.SUFFICIENT_HOLDS,
                summary=(
                    "outer shift nonpositive, inner shifts nonnegative, "
                    "at most one zero: definite curvature everywhere"
                ),
            )
        y = np.array([iv.midpoint() for iv in box])
        sd = ShiftedDiagonal(c0=-g0 / y.sum() if not zero0 else 0.0, c=tuple(gi / y))
        return LocalVerdict(
            klass=LocalClass.BOUNDARY,
            summary=(
                f"outer shift nonpositive, inner shifts nonnegative, but {nzero} zeros: "
                "necessary condition passes, sufficiency not established"
            ),
            witness=LocalWitness(y=y, gamma=sd.matrix()),
        )

    if np.all(g > GAMMA_ZERO_TOL):
        lhs, rhs = _g1plus_sides(g, box)
        if lhs <= rhs:
            if np.any(gi != g0):
                return LocalVerdict(
                    klass=LocalClass.SUFFICIENT_HOLDS,
                    summary=(
                        "all shifts positive, interval inequality holds "
                        f"({lhs:.6g} <= {rhs:.6g}) with a distinct inner shift"
                    ),
                )
            y = np.array([iv.midpoint() for iv in box])
            sd = ShiftedDiagonal(c0=-g0 / y.sum(), c=tuple(gi / y))
            return LocalVerdict(
                klass=LocalClass.BOUNDARY,
                summary=(
                    "all shifts positive and equal: curvature semidefinite-only "
                    "along the whole box, sufficiency not established"
                ),
                witness=LocalWitness(y=y, gamma=sd.matrix()),
            )
        return LocalVerdict(
            klass=LocalClass.NECESSARY_FAILS,
            summary=(
                f"interval inequality fails ({lhs:.6g} > {rhs:.6g}); "
                "curvature is indefinite somewhere in the box"
            ),
            witness=_minkowski_fail_witness(g, box),
        )

    neg_inner = gi < -GAMMA_ZERO_TOL
    if (
        g0 < -GAMMA_ZERO_TOL
        and int(neg_inner.sum()) == 1
        and np.all(gi[~neg_inner] > GAMMA_ZERO_TOL)
    ):
        lhs, rhs = _g1plus_sides(g, box)
        if lhs <= rhs:
            return LocalVerdict(
                klass=LocalClass.SUFFICIENT_HOLDS,
                summary=(
                    "outer and one inner shift negative, rest positive, interval "
                    f"inequality holds ({lhs:.6g} <= {rhs:.6g})"
                ),
            )
        return LocalVerdict(
            klass=LocalClass.NECESSARY_FAILS,
            summary=(
                f"interval inequality fails ({lhs:.6g} > {rhs:.6g}) in the "
                "two-negative-shifts case"
            ),
            witness=_minkowski_fail_witness(g, box),
        )

    return LocalVerdict(
        klass=LocalClass.NECESSARY_FAILS,
        summary="shift sign pattern rules out semidefinite curvature at every point",
        witness=_minkowski_fail_witness(g, box),
    )


def decide_hoelder_local(gammas) -> LocalVerdict:
    """Exact local test for product-coupled two-parameter means.

    ``gammas`` are the shifts r_i + s_i in the mirrored-outer convention.
    The curvature matrix factors into a positive scalar field times the
    constant matrix diag(gamma_1..gamma_k) + gamma_0, so its classification
    is point-independent.
    """
    g = np.asarray(gammas, dtype=float)
    if g.ndim != 1 or g.size < 3:
        raise ShapeError("need gamma_0 plus k >= 2 inner shifts")
    sd = ShiftedDiagonal(c0=g[0], c=tuple(g[1:]))
    res = classify_shifted_diagonal(sd)
    base = f"constant-factor curvature: {res.certificate}"
    if res.klass is PsdClass.POSITIVE_DEFINITE:
        return LocalVerdict(klass=LocalClass.SUFFICIENT_HOLDS, summary=base)
    if res.klass is PsdClass.POSITIVE_SEMIDEFINITE_ONLY:
        return LocalVerdict(
            klass=LocalClass.BOUNDARY,
            summary=base + "; necessary condition passes, sufficiency not established",
            witness=LocalWitness(y=None, gamma=sd.matrix()),
        )
    return LocalVerdict(
        klass=LocalClass.NECESSARY_FAILS,
        summary=base,
        witness=LocalWitness(
            y=None, gamma=sd.matrix(), direction=negative_direction(sd)
        ),
    )


def _convexifier_of(mean):
    if isinstance(mean, GiniMean):
        return gini_convexifier(mean.params)
    if mean.convexifier is None:
        raise CapabilityError("mean carries no convexifier map")
    return mean.convexifier


def build_psi_probe(spec: GammaSpec, y, step: float = 1e-4) -> np.ndarray:
    """Numerical Hessian of the reparametrized coupling map.

    With v_alpha the per-mean convexifiers, Psi(u) = v_0(Phi(v^-1(u))) is
    evaluated at u = v(y) and differenced centrally with per-axis steps
    step * max(1, |u_j|).  Multiplying by the sign of the outer generator's
    derivative, negative semidefiniteness of the result is equivalent to
    positive semidefiniteness of Gamma(y).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    problem = spec.problem
    cv0 = _convexifier_of(problem.left)
    cvs = [_convexifier_of(m) for m in problem.right]
    u = np.array([cvs[j].value(y[j]) for j in range(problem.k)])

    def psi(uvec: np.ndarray) -> float:
        t = np.array([cvs[j].inverse(uvec[j]) for j in range(problem.k)])
        if not np.all(np.isfinite(t)):
            raise NumericError("probe step left the reparametrized range")
        return cv0.value(problem.phi.value(t))

    k = problem.k
    h = step * np.maximum(1.0, np.abs(u))
    # shrink any step that would cross the boundary of the change of
    # variables' range (possible when |u_j| is far below the 1.0 floor)
    for j in range(k):
        for _ in range(60):
            with np.errstate(invalid="ignore"):
                lo = cvs[j].inverse(u[j] - h[j])
                hi = cvs[j].inverse(u[j] + h[j])
            if np.isfinite(lo) and np.isfinite(hi):
                break
            h[j] *= 0.25
        else:
            raise NumericError("no valid probe step on axis %d" % j)
    base = psi(u)
    hess = np.empty((k, k))
    for i in range(k):
        up = u.copy()
        up[i] += h[i]
        dn = u.copy()
        dn[i] -= h[i]
        hess[i, i] = (psi(up) - 2.0 * base + psi(dn)) / h[i] ** 2
        for j in range(i + 1, k):
            pp = u.copy()
            pp[[i, j]] += [h[i], h[j]]
            pm = u.copy()
            pm[i] += h[i]
            pm[j] -= h[j]
            mp = u.copy()
            mp[i] -= h[i]
            mp[j] += h[j]
            mm = u.copy()
            mm[[i, j]] -= [h[i], h[j]]
            hess[i, j] = hess[j, i] = (
                psi(pp) - psi(pm) - psi(mp) + psi(mm)
            ) / (4.0 * h[i] * h[j])
    return hess


def psi_probe_sign(spec: GammaSpec) -> float:
    """Sign by which the probe Hessian is flipped before the NSD test."""
    return generator_sign(spec.problem.left)
