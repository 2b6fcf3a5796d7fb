"""Diagonal calculus for the coupled inequality.

Holds the coupling map, the inequality problem container, closed-form
partial derivatives of the means and of the deficiency function F at
diagonal points, finite-difference oracles for both, and the
weight-proportionality test that every valid inequality must pass.

Matrix convention: an argument x is (n, k); row i feeds the coupling map,
column j feeds the j-th inner mean.  F(x) is the coupled right side minus
the outer-mean left side, so the inequality holds at x exactly when
F(x) >= 0, and F vanishes on the diagonal {x with constant columns}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CapabilityError, ConstructionError, DomainError, ShapeError
from .means import (
    GiniMean,
    Interval,
    MeanSpec,
    Weights,
    mean_domain,
    mean_n,
    mean_value,
)

#: Central finite-difference steps, scaled by max(1, |coordinate|).
FD_FIRST_STEP = 1e-5
FD_SECOND_STEP = 1e-4

#: Sup-deviation below which sampled weight ratios count as constant.
WEIGHT_RATIO_TOL = 1e-9


@dataclass(frozen=True)
class PhiSpec:
    """Coupling map on a k-box: builtin sum or product, or a custom map
    with explicit value, gradient and Hessian."""

    kind: str
    _value: Callable[[np.ndarray], float] | None = None
    _grad: Callable[[np.ndarray], np.ndarray] | None = None
    _hess: Callable[[np.ndarray], np.ndarray] | None = None
    codomain: Interval | None = None

    @classmethod
    def sum(cls) -> "PhiSpec":
        return cls(kind="sum")

    @classmethod
    def product(cls) -> "PhiSpec":
        return cls(kind="product")

    @classmethod
    def custom(cls, value, grad, hess, codomain: Interval) -> "PhiSpec":
        if value is None or grad is None or hess is None:
            raise ConstructionError("custom coupling maps need value, grad and hess")
        return cls(kind="custom", _value=value, _grad=grad, _hess=hess, codomain=codomain)

    def value(self, y) -> float:
        y = np.asarray(y, dtype=float)
        if self.kind == "sum":
            return float(y.sum())
        if self.kind == "product":
            return float(y.prod())
        return float(self._value(y))

    def grad(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "sum":
            return np.ones_like(y)
        if self.kind == "product":
            return y.prod() / y
        return np.asarray(self._grad(y), dtype=float)

    def hess(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        k = y.size
        if self.kind == "sum":
            return np.zeros((k, k))
        if self.kind == "product":
            h = y.prod() / np.outer(y, y)
            np.fill_diagonal(h, 0.0)
            return h
        return np.asarray(self._hess(y), dtype=float)


def _phi_image(phi: PhiSpec, box: tuple[Interval, ...]) -> Interval:
    if phi.kind == "sum":
        return Interval(sum(iv.lo for iv in box), sum(iv.hi for iv in box))
    if phi.kind == "product":
        lo = 1.0
        hi = 1.0
        for iv in box:
            lo *= iv.lo
            hi *= iv.hi
        return Interval(lo, hi)
    return phi.codomain


@dataclass(frozen=True)
class InequalityProblem:
    """The outer mean, k inner means, coupling map and k-axis box of the
    target inequality  outer(Phi(rows)) <= Phi(inner means of columns)."""

    left: MeanSpec
    right: tuple[MeanSpec, ...]
    phi: PhiSpec
    box: tuple[Interval, ...]

    def __post_init__(self):
        object.__setattr__(self, "right", tuple(self.right))
        object.__setattr__(self, "box", tuple(self.box))
        if len(self.right) < 2 or len(self.right) != len(self.box):
            raise ConstructionError("need k >= 2 inner means, one interval per slot")
        ns = {mean_n(self.left)} | {mean_n(m) for m in self.right}
        if len(ns) != 1 or mean_n(self.left) < 2:
            raise ConstructionError("all means must share the same variable count n >= 2")
        for j, (m, iv) in enumerate(zip(self.right, self.box)):
            if not mean_domain(m).contains_interval(iv):
                raise ConstructionError(f"inner mean {j} does not cover its interval")
        if self.phi.kind == "product" and any(iv.lo < 0.0 for iv in self.box):
            raise ConstructionError("product coupling requires a positive box")
        if self.phi.kind == "custom":
            if self.phi.codomain is None:
                raise ConstructionError("custom coupling maps must declare a codomain")
            self._check_custom_grad()
        image = _phi_image(self.phi, self.box)
        if not mean_domain(self.left).contains_interval(image):
            raise ConstructionError("outer mean does not cover the coupling map's image")

    def _check_custom_grad(self):
        axes = [iv.interior_points(3) for iv in self.box]
        pts = list(itertools.product(*axes))
        if len(pts) > 200:
            pts = pts[:: max(1, len(pts) // 200)]
        for y in pts:
            g = self.phi.grad(np.asarray(y))
            if np.any(g == 0.0) or not np.all(np.isfinite(g)):
                raise ConstructionError("custom coupling map has a vanishing partial on the box")

    @property
    def k(self) -> int:
        return len(self.right)

    @property
    def n(self) -> int:
        return mean_n(self.left)

    def phi_image(self) -> Interval:
        return _phi_image(self.phi, self.box)

    def contains_matrix(self, x: np.ndarray) -> bool:
        for j, iv in enumerate(self.box):
            if not iv.contains(x[:, j]):
                return False
        return True


def diagonal_matrix(y, n: int) -> np.ndarray:
    """The (n, k) matrix whose j-th column is constant at y_j."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return np.tile(y, (n, 1))


def diag_first_partials(mean: MeanSpec, t: float) -> np.ndarray:
    """First partials of the mean at the constant vector (t, ..., t).

    Entry ell is p_ell(t) / p0(t); for a Gini mean this is its weight vector
    independently of t.
    """
    if not mean_domain(mean).contains(t):
        raise DomainError("diagonal point outside the mean's domain")
    if isinstance(mean, GiniMean):
        return mean.weights.lam.copy()
    vals = np.array([wf.value(t) for wf in mean.p], dtype=float)
    return vals / vals.sum()


def diag_second_partials(mean: MeanSpec, t: float) -> np.ndarray:
    """Second partials of the mean at (t, ..., t) as an (n, n) matrix.

    Diagonal entries:  2 p_l' (p0 - p_l)/p0^2 + p_l (p0 - p_l)/p0^2 * f''/f'.
    Off-diagonal:     -(p_l p_m)'/p0^2 - p_l p_m / p0^2 * f''/f'.
    For a Gini mean both collapse to lam_m (delta_lm - lam_l) (r+s-1)/t.
    """
    if isinstance(mean, GiniMean):
        if not mean.domain.contains(t):
            raise DomainError("diagonal point outside the mean's domain")
        lam = mean.weights.lam
        factor = (mean.params.r + mean.params.s - 1.0) / t
        return (np.diag(lam) - np.outer(lam, lam)) * factor
    if not mean.has_second_order:
        raise CapabilityError("second derivative of f and weight derivatives are required")
    if not mean.domain.contains(t):
        raise DomainError("diagonal point outside the mean's domain")
    n = mean.n
    pv = np.array([wf.value(t) for wf in mean.p], dtype=float)
    pd = np.array([wf.deriv(t) for wf in mean.p], dtype=float)
    p0 = pv.sum()
    ratio = mean.f_second(t) / mean.f_deriv(t)
    out = np.empty((n, n))
    for ell in range(n):
        for m in range(n):
            if ell == m:
                out[ell, ell] = (
                    2.0 * pd[ell] * (p0 - pv[ell]) + pv[ell] * (p0 - pv[ell]) * ratio
                ) / p0**2
            else:
                cross = pd[ell] * pv[m] + pv[ell] * pd[m]
                out[ell, m] = -(cross + pv[ell] * pv[m] * ratio) / p0**2
    return out


def _as_problem_matrix(problem: InequalityProblem, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (problem.n, problem.k):
        raise ShapeError(f"expected a {problem.n}x{problem.k} matrix, got {arr.shape}")
    for j, iv in enumerate(problem.box):
        if not iv.contains(arr[:, j]):
            raise DomainError(f"column {j} leaves its interval")
    return arr


def deficiency_parts(problem: InequalityProblem, x) -> tuple[float, float]:
    """(left, right) sides of the inequality at x, freshly evaluated."""
    arr = _as_problem_matrix(problem, x)
    phi_rows = np.array([problem.phi.value(arr[i]) for i in range(problem.n)])
    left_dom = mean_domain(problem.left)
    if not left_dom.contains(phi_rows):
        raise DomainError("coupled row values leave the outer mean's domain")
    lhs = mean_value(problem.left, phi_rows)
    inner = np.array(
        [mean_value(problem.right[j], arr[:, j]) for j in range(problem.k)]
    )
    rhs = problem.phi.value(inner)
    return float(lhs), float(rhs)


def deficiency(problem: InequalityProblem, x) -> float:
    """Right side minus left side; nonnegative exactly where the inequality
    holds, zero on the diagonal."""
    lhs, rhs = deficiency_parts(problem, x)
    return rhs - lhs


@dataclass(frozen=True)
class GradientCheckReport:
    """Analytic vs finite-difference derivatives of F at a diagonal point.

    Relative deviations are measured against max(1, |analytic entry|) so
    that exact zeros do not blow the ratio up.
    """

    point: np.ndarray
    grad_analytic: np.ndarray
    grad_fd: np.ndarray
    hess_analytic: np.ndarray
    hess_fd: np.ndarray
    max_abs_grad: float
    max_rel_grad: float
    max_abs_hess: float
    max_rel_hess: float


def deficiency_derivatives(problem: InequalityProblem, y) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form gradient and Hessian of F at the diagonal point over y.

    Flat index convention: coordinate (row ell, column i) of the matrix
    argument maps to ell + n*i.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    k, n = problem.k, problem.n
    phi_y = problem.phi.value(y)
    g = problem.phi.grad(y)
    h = problem.phi.hess(y)
    d0 = diag_first_partials(problem.left, phi_y)
    s0 = diag_second_partials(problem.left, phi_y)
    dj = [diag_first_partials(problem.right[j], y[j]) for j in range(k)]
    sj = [diag_second_partials(problem.right[j], y[j]) for j in range(k)]

    grad = np.empty(n * k)
    for i in range(k):
        for ell in range(n):
            grad[ell + n * i] = g[i] * (dj[i][ell] - d0[ell])

    hess = np.empty((n * k, n * k))
    for i in range(k):
        for j in range(k):
            for ell in range(n):
                for m in range(n):
                    delta_lm = 1.0 if ell == m else 0.0
                    delta_ij = 1.0 if i == j else 0.0
                    val = h[i, j] * (dj[j][m] * dj[i][ell] - delta_lm * d0[m])
                    val -= g[j] * (g[i] * s0[ell, m] - delta_ij * sj[j][ell, m])
                    hess[ell + n * i, m + n * j] = val
    return grad, hess


def deficiency_gradient_check(
    problem: InequalityProblem,
    y,
    first_step: float = FD_FIRST_STEP,
    second_step: float = FD_SECOND_STEP,
) -> GradientCheckReport:
    """Compare the closed-form diagonal derivatives of F against central
    finite differences of ``deficiency``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    k, n = problem.k, problem.n
    grad_a, hess_a = deficiency_derivatives(problem, y)

    base = diagonal_matrix(y, n)
    f0 = deficiency(problem, base)

    def f_at(*bumps) -> float:
        x = base.copy()
        for (ell, i, dv) in bumps:
            x[ell, i] += dv
        return deficiency(problem, x)

    coords = [(ell, i) for i in range(k) for ell in range(n)]
    h1 = np.array([first_step * max(1.0, abs(y[i])) for (_, i) in coords])
    grad_fd = np.empty(n * k)
    for a, (ell, i) in enumerate(coords):
        grad_fd[ell + n * i] = (
            f_at((ell, i, h1[a])) - f_at((ell, i, -h1[a]))
        ) / (2.0 * h1[a])

    h2 = np.array([second_step * max(1.0, abs(y[i])) for (_, i) in coords])
    hess_fd = np.empty((n * k, n * k))
    for a, (ell, i) in enumerate(coords):
        ia = ell + n * i
        for b, (m, j) in enumerate(coords):
            ib = m + n * j
            if ib < ia:
                hess_fd[ia, ib] = hess_fd[ib, ia]
                continue
            if ia == ib:
                hess_fd[ia, ia] = (
                    f_at((ell, i, h2[a])) - 2.0 * f0 + f_at((ell, i, -h2[a]))
                ) / h2[a] ** 2
            else:
                hess_fd[ia, ib] = (
                    f_at((ell, i, h2[a]), (m, j, h2[b]))
                    - f_at((ell, i, h2[a]), (m, j, -h2[b]))
                    - f_at((ell, i, -h2[a]), (m, j, h2[b]))
                    + f_at((ell, i, -h2[a]), (m, j, -h2[b]))
                ) / (4.0 * h2[a] * h2[b])

    dg = np.abs(grad_a - grad_fd)
    dh = np.abs(hess_a - hess_fd)
    rel_g = dg / np.maximum(1.0, np.abs(grad_a))
    rel_h = dh / np.maximum(1.0, np.abs(hess_a))
    return GradientCheckReport(
        point=y,
        grad_analytic=grad_a,
        grad_fd=grad_fd,
        hess_analytic=hess_a,
        hess_fd=hess_fd,
        max_abs_grad=float(dg.max()),
        max_rel_grad=float(rel_g.max()),
        max_abs_hess=float(dh.max()),
        max_rel_hess=float(rel_h.max()),
    )


def weight_proportionality_check(mean: MeanSpec, samples: int = 33) -> Weights | None:
    """Sample p_ell / p0 on an equispaced interior grid and return the common
    weight vector when the ratios are constant, None otherwise.

    A None result means the first-order necessary condition for local
    validity fails for this mean.
    """
    if samples < 2:
        raise ShapeError("need at least two sample points")
    if isinstance(mean, GiniMean):
        return Weights(mean.weights.lam)
    pts = mean.domain.interior_points(samples, geometric=False)
    ratios = np.empty((samples, mean.n))
    for a, t in enumerate(pts):
        vals = np.array([wf.value(t) for wf in mean.p], dtype=float)
        ratios[a] = vals / vals.sum()
    lam_hat = ratios.mean(axis=0)
    if np.abs(ratios - lam_hat).max() <= WEIGHT_RATIO_TOL:
        return Weights(lam_hat)
    return None
