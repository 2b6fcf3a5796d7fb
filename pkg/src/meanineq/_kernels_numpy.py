"""Pure-numpy implementations of the hot kernels.

Every function here has a loop-level twin in ``_kernels_numba``; the active
module is chosen by ``meanineq._backend``.  Batch axes come first, dtype is
float64 throughout.
"""

import numpy as np

NAME = "numpy"

# |r - s| below this selects the logarithmic branch of the two-parameter mean.
RS_EQUAL_TOL = 1e-9

PD, PSD_ONLY, INDEFINITE = 0, 1, 2

_JACOBI_SWEEPS = 60


def _lse(e, lx, loglam):
    # log(sum_i lam_i * x_i**e); exactly 0.0 for e == 0 because lam sums to 1
    if e == 0.0:
        return np.zeros(lx.shape[0])
    a = e * lx + loglam
    m = a.max(axis=1)
    return m + np.log(np.exp(a - m[:, None]).sum(axis=1))


def _ratio_exponent(r, s, lx, loglam):
    """((log sum lam x**r) - (log sum lam x**s)) / (r - s), row-wise.

    Rows with small |r - s| * max|log x| go through a cancellation-free
    softmax/expm1/log1p form; the rest take the plain logsumexp difference.
    """
    d = r - s
    out = np.empty(lx.shape[0])
    near = abs(d) * np.abs(lx).max(axis=1, initial=0.0) < 0.5
    if near.any():
        lxn = lx[near]
        a = s * lxn + loglam
        a -= a.max(axis=1, keepdims=True)
        w = np.exp(a)
        acc = (w * np.expm1(d * lxn)).sum(axis=1)
        out[near] = np.log1p(acc / w.sum(axis=1)) / d
    far = ~near
    if far.any():
        lxf = lx[far]
        out[far] = (_lse(r, lxf, loglam) - _lse(s, lxf, loglam)) / d
    return out


def gini_mean_batch(r, s, lam, x):
    """Two-parameter weighted mean of each row of x (B, n) -> (B,)."""
    lx = np.log(x)
    loglam = np.log(lam)
    if abs(r - s) < RS_EQUAL_TOL:
        a = r * lx + loglam
        a -= a.max(axis=1, keepdims=True)
        w = np.exp(a)
        return np.exp((w * lx).sum(axis=1) / w.sum(axis=1))
    return np.exp(_ratio_exponent(r, s, lx, loglam))


def power_mean_batch(p, lam, x):
    """Weighted power mean of each row of x (B, n) -> (B,)."""
    lx = np.log(x)
    if abs(p) < RS_EQUAL_TOL:
        return np.exp(lx @ lam)
    return np.exp(_ratio_exponent(p, 0.0, lx, np.log(lam)))


def chi_batch(r, s, t):
    """Curvature function (t**r - t**s)/(r - s), log branch at r == s."""
    lt = np.log(t)
    if abs(r - s) < RS_EQUAL_TOL:
        return np.exp(r * lt) * lt
    d = (r - s) * lt
    out = np.empty_like(lt)
    near = np.abs(d) < 0.5  # cancellation-prone region, go through expm1
    out[near] = np.exp(s * lt[near]) * np.expm1(d[near]) / (r - s)
    far = ~near
    out[far] = (np.exp(r * lt[far]) - np.exp(s * lt[far])) / (r - s)
    return out


def eigvals_sym_batch(a):
    """Eigenvalues of symmetric matrices (B, k, k) -> (B, k), ascending.

    Lock-step cyclic Jacobi: every matrix in the batch receives the same
    rotation schedule with its own angles.
    """
    w = np.array(a, dtype=np.float64, copy=True)
    b, k, _ = w.shape
    if b == 0 or k == 1:
        return w[:, :, 0].copy()
    for _ in range(_JACOBI_SWEEPS):
        norm2 = (w * w).sum(axis=(1, 2))
        diag2 = (np.einsum("bii->bi", w) ** 2).sum(axis=1)
        off2 = norm2 - diag2
        if np.all(off2 <= 1e-28 * np.maximum(norm2, 1e-300)):
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = w[:, p, q]
                # rotations this small are identity to double precision
                skip = np.abs(apq) <= 1e-148 * (
                    np.abs(w[:, p, p]) + np.abs(w[:, q, q]) + 1e-148
                )
                denom = np.where(skip, 1.0, 2.0 * apq)
                theta = np.where(skip, 0.0, (w[:, q, q] - w[:, p, p]) / denom)
                t = np.where(theta >= 0.0, 1.0, -1.0) / (
                    np.abs(theta) + np.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / np.sqrt(t * t + 1.0)
                s_ = t * c
                c = np.where(skip, 1.0, c)
                s_ = np.where(skip, 0.0, s_)
                wp = w[:, p, :].copy()
                wq = w[:, q, :].copy()
                w[:, p, :] = c[:, None] * wp - s_[:, None] * wq
                w[:, q, :] = s_[:, None] * wp + c[:, None] * wq
                wp = w[:, :, p].copy()
                wq = w[:, :, q].copy()
                w[:, :, p] = c[:, None] * wp - s_[:, None] * wq
                w[:, :, q] = s_[:, None] * wp + c[:, None] * wq
    vals = np.einsum("bii->bi", w).copy()
    vals.sort(axis=1)
    return vals


def deficiency_gini_batch(phi_kind, rs, lams, x):
    """Right-minus-left side of the coupled inequality for all-Gini problems.

    phi_kind: 0 sum, 1 product.  rs: (k+1, 2) exponent pairs, outer first.
    lams: (k+1, n) weight rows.  x: (B, n, k).  Returns (B,).
    """
    b, n, k = x.shape
    rows = x.sum(axis=2) if phi_kind == 0 else x.prod(axis=2)
    lhs = gini_mean_batch(rs[0, 0], rs[0, 1], lams[0], rows)
    if phi_kind == 0:
        rhs = np.zeros(b)
        for j in range(k):
            rhs += gini_mean_batch(rs[j + 1, 0], rs[j + 1, 1], lams[j + 1], x[:, :, j])
    else:
        rhs = np.ones(b)
        for j in range(k):
            rhs *= gini_mean_batch(rs[j + 1, 0], rs[j + 1, 1], lams[j + 1], x[:, :, j])
    return rhs - lhs


def classify_shifted_batch(c0, c, zero_tol, rec_tol):
    """Closed-form PSD classes for diag(c) + c0 matrices.

    c0: (B,), c: (B, k).  Returns (B,) int64 of PD / PSD_ONLY / INDEFINITE.
    """
    full = np.concatenate([np.asarray(c0, dtype=float)[:, None], c], axis=1)
    neg = full < -zero_tol
    zero = np.abs(full) <= zero_tol
    nneg = neg.sum(axis=1)
    nzero = zero.sum(axis=1)
    out = np.full(full.shape[0], INDEFINITE, dtype=np.int64)
    allnn = nneg == 0
    out[allnn & (nzero <= 1)] = PD
    out[allnn & (nzero > 1)] = PSD_ONLY
    onen = (nneg == 1) & (nzero == 0)
    if onen.any():
        rec = 1.0 / full[onen]
        ssum = rec.sum(axis=1)
        band = rec_tol * np.abs(rec).max(axis=1)
        out[onen] = np.where(
            ssum < -band, PD, np.where(ssum <= band, PSD_ONLY, INDEFINITE)
        )
    return out
