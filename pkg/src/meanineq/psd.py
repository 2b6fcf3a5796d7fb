"""Positive-semidefiniteness tests.

``classify_shifted_diagonal`` decides matrices of the form diag(c) + c0 in
closed form via the sign pattern of (c0, c) and the reciprocal-sum test.
``classify_symmetric`` is the independent oracle: cyclic-Jacobi eigenvalues
of an arbitrary symmetric matrix.  The two are cross-checked against each
other in the test suite and the self test.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ConstructionError, ShapeError

#: |c_i| at or below this counts as zero in the closed-form case split.
ZERO_TOL = 1e-12

#: |reciprocal sum| within ZERO-like band of max|1/c_i| counts as equality.
RECIPROCAL_TOL = 1e-12

#: Default eigenvalue classification band, relative to the spectral radius.
DEFAULT_EIG_TOL = 1e-9


class PsdClass(enum.Enum):
    POSITIVE_DEFINITE = "positive_definite"
    POSITIVE_SEMIDEFINITE_ONLY = "positive_semidefinite_only"
    INDEFINITE = "indefinite"


_KERNEL_CLASS = {
    kernels.PD: PsdClass.POSITIVE_DEFINITE,
    kernels.PSD_ONLY: PsdClass.POSITIVE_SEMIDEFINITE_ONLY,
    kernels.INDEFINITE: PsdClass.INDEFINITE,
}


@dataclass(frozen=True)
class PsdResult:
    klass: PsdClass
    certificate: str


@dataclass(frozen=True)
class ShiftedDiagonal:
    """The matrix diag(c_1..c_k) + c0 * (all ones), k >= 2."""

    c0: float
    c: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in np.atleast_1d(self.c)))
        vals = (self.c0, *self.c)
        if len(self.c) < 2:
            raise ConstructionError("need k >= 2 diagonal entries")
        if not all(np.isfinite(vals)):
            raise ConstructionError("entries must be finite")

    @property
    def k(self) -> int:
        return len(self.c)

    def matrix(self) -> np.ndarray:
        return np.diag(np.asarray(self.c, dtype=float)) + self.c0


def classify_shifted_diagonal(m: ShiftedDiagonal) -> PsdResult:
    """Closed-form classification of diag(c) + c0.

    PSD iff all of (c0, c) are nonnegative, or exactly one is negative with
    the rest positive and the reciprocal sum 1/c0 + sum 1/c_i <= 0.  PD iff
    additionally at most one entry is zero (first case) or the reciprocal
    inequality is strict (second case).
    """
    full = np.array([m.c0, *m.c], dtype=float)
    neg = full < -ZERO_TOL
    zero = np.abs(full) <= ZERO_TOL
    nneg = int(neg.sum())
    nzero = int(zero.sum())
    if nneg == 0:
        if nzero == 0:
            return PsdResult(PsdClass.POSITIVE_DEFINITE, "all shifts positive")
        if nzero == 1:
            return PsdResult(
                PsdClass.POSITIVE_DEFINITE, "all shifts nonnegative, a single zero"
            )
        return PsdResult(
            PsdClass.POSITIVE_SEMIDEFINITE_ONLY,
            f"all shifts nonnegative but {nzero} zeros",
        )
    if nneg == 1 and nzero == 0:
        rec = 1.0 / full
        ssum = float(rec.sum())
        band = RECIPROCAL_TOL * float(np.abs(rec).max())
        if ssum < -band:
            return PsdResult(
                PsdClass.POSITIVE_DEFINITE,
                f"one negative shift, reciprocal sum {ssum:.6g} < 0",
            )
        if ssum <= band:
            return PsdResult(
                PsdClass.POSITIVE_SEMIDEFINITE_ONLY,
                f"one negative shift, reciprocal sum {ssum:.6g} at equality",
            )
        return PsdResult(
            PsdClass.INDEFINITE,
            f"one negative shift, reciprocal sum {ssum:.6g} > 0",
        )
    return PsdResult(
        PsdClass.INDEFINITE,
        f"sign pattern rules semidefiniteness out ({nneg} negative, {nzero} zero)",
    )


def classify_shifted_diagonal_batch(c0, c) -> np.ndarray:
    """Kernel-backed bulk variant; returns the integer class codes used by
    the kernels module (see ``psd_class_from_code``)."""
    c0 = np.asarray(c0, dtype=float)
    c = np.asarray(c, dtype=float)
    return kernels.classify_shifted_batch(c0, c, ZERO_TOL, RECIPROCAL_TOL)


def quadratic_form(m: ShiftedDiagonal, x) -> float:
    """x^T (diag(c) + c0) x evaluated without building the matrix."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(m.c, dtype=float)
    return float(m.c0 * x.sum() ** 2 + (c * x * x).sum())


def negative_direction(m: ShiftedDiagonal) -> np.ndarray:
    """A vector x with x^T C x < 0 for an indefinite shifted-diagonal C.

    Uses the two standard constructions: a difference of unit vectors when
    two shifts sum negative, else the reciprocal vector; falls back to the
    minimal eigenvector.
    """
    full = np.array([m.c0, *m.c], dtype=float)
    order = np.argsort(full)
    i, j = int(order[0]), int(order[1])
    if full[i] + full[j] < 0.0:
        ext = np.zeros(m.k + 1)
        ext[i] = 1.0
        ext[j] = -1.0
        cand = ext[1:]
        if quadratic_form(m, cand) < 0.0:
            return cand
    neg = np.flatnonzero(full < -ZERO_TOL)
    if neg.size == 1:
        i = int(neg[0])
        ext = np.zeros(m.k + 1)
        rest = [a for a in range(m.k + 1) if a != i]
        ext[rest] = 1.0 / full[rest]
        ext[i] = -ext[rest].sum()
        cand = ext[1:]
        if quadratic_form(m, cand) < 0.0:
            return cand
    vals, vecs = jacobi_eigh(m.matrix())
    return vecs[:, 0]


def jacobi_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi with accumulated rotations: eigenvalues ascending and
    the matching orthonormal eigenvector columns."""
    w = np.array(a, dtype=float, copy=True)
    k = w.shape[0]
    v = np.eye(k)
    for _ in range(60):
        off2 = np.sum(w * w) - np.sum(np.diag(w) ** 2)
        if off2 <= 1e-28 * max(np.sum(w * w), 1e-300):
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = w[p, q]
                # rotations this small are identity to double precision
                if abs(apq) <= 1e-148 * (abs(w[p, p]) + abs(w[q, q]) + 1e-148):
                    continue
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (
                    abs(theta) + np.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                wp = w[p, :].copy()
                wq = w[q, :].copy()
                w[p, :] = c * wp - s * wq
                w[q, :] = s * wp + c * wq
                wp = w[:, p].copy()
                wq = w[:, q].copy()
                w[:, p] = c * wp - s * wq
                w[:, q] = s * wp + c * wq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    vals = np.diag(w).copy()
    order = np.argsort(vals)
    return vals[order], v[:, order]


def eigvals_symmetric(a) -> np.ndarray:
    """Ascending eigenvalues via the active kernel backend's Jacobi sweep."""
    a = np.asarray(a, dtype=float)
    return kernels.eigvals_sym_batch(a[None, :, :])[0]


def classify_symmetric(m, tol: float = DEFAULT_EIG_TOL) -> PsdResult:
    """Eigenvalue-oracle classification of a symmetric matrix.

    The classification band is tol * max(1, spectral radius): positive
    definite above it, semidefinite-only inside it, indefinite below.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("expected a square matrix")
    scale0 = max(1.0, float(np.abs(a).max()))
    asym = float(np.abs(a - a.T).max())
    if asym > tol * scale0:
        raise ShapeError(f"matrix is not symmetric within tolerance ({asym:.3g})")
    sym = 0.5 * (a + a.T)
    vals = eigvals_symmetric(sym)
    scale = max(1.0, float(np.abs(vals).max()))
    lam_min = float(vals[0])
    cert = f"eigenvalue range [{lam_min:.6g}, {vals[-1]:.6g}], band {tol * scale:.3g}"
    if lam_min > tol * scale:
        return PsdResult(PsdClass.POSITIVE_DEFINITE, cert)
    if lam_min >= -tol * scale:
        return PsdResult(PsdClass.POSITIVE_SEMIDEFINITE_ONLY, cert)
    return PsdResult(PsdClass.INDEFINITE, cert)


def classify_eigvals_batch(vals: np.ndarray, tol: float = DEFAULT_EIG_TOL) -> np.ndarray:
    """Integer PSD classes from precomputed ascending eigenvalue rows."""
    scale = np.maximum(1.0, np.abs(vals).max(axis=1))
    lam_min = vals[:, 0]
    out = np.full(vals.shape[0], kernels.INDEFINITE, dtype=np.int64)
    out[lam_min >= -tol * scale] = kernels.PSD_ONLY
    out[lam_min > tol * scale] = kernels.PD
    return out


def psd_class_from_code(code: int) -> PsdClass:
    return _KERNEL_CLASS[int(code)]
