"""Numba-jitted implementations of the hot kernels.

Same signatures and semantics as ``_kernels_numpy``; explicit loops instead
of whole-array operations so the JIT can fuse them.
"""

import numpy as np
from numba import njit

NAME = "numba"

RS_EQUAL_TOL = 1e-9

PD, PSD_ONLY, INDEFINITE = 0, 1, 2

_JACOBI_SWEEPS = 60


@njit(cache=True)
def _lse_logs(e, loglam, lx):
    # log(sum_i lam_i * x_i**e) from precomputed log x_i;
    # exactly 0.0 for e == 0 because lam sums to 1
    if e == 0.0:
        return 0.0
    n = lx.shape[0]
    m = -1.0e308
    for i in range(n):
        a = e * lx[i] + loglam[i]
        if a > m:
            m = a
    acc = 0.0
    for i in range(n):
        acc += np.exp(e * lx[i] + loglam[i] - m)
    return m + np.log(acc)


@njit(cache=True)
def _gini_logs(r, s, loglam, lx):
    n = lx.shape[0]
    d = r - s
    if abs(d) < RS_EQUAL_TOL:
        m = -1.0e308
        for i in range(n):
            a = r * lx[i] + loglam[i]
            if a > m:
                m = a
        num = 0.0
        den = 0.0
        for i in range(n):
            w = np.exp(r * lx[i] + loglam[i] - m)
            num += w * lx[i]
            den += w
        return np.exp(num / den)
    amax = 0.0
    for i in range(n):
        if abs(lx[i]) > amax:
            amax = abs(lx[i])
    if abs(d) * amax < 0.5:
        # cancellation-free form of the logsumexp difference
        m = -1.0e308
        for i in range(n):
            a = s * lx[i] + loglam[i]
            if a > m:
                m = a
        acc = 0.0
        den = 0.0
        for i in range(n):
            w = np.exp(s * lx[i] + loglam[i] - m)
            acc += w * np.expm1(d * lx[i])
            den += w
        return np.exp(np.log1p(acc / den) / d)
    return np.exp((_lse_logs(r, loglam, lx) - _lse_logs(s, loglam, lx)) / d)


@njit(cache=True)
def gini_mean_batch(r, s, lam, x):
    b, n = x.shape
    out = np.empty(b)
    loglam = np.log(lam)
    lx = np.empty(n)
    for i in range(b):
        for j in range(n):
            lx[j] = np.log(x[i, j])
        out[i] = _gini_logs(r, s, loglam, lx)
    return out


@njit(cache=True)
def power_mean_batch(p, lam, x):
    b, n = x.shape
    out = np.empty(b)
    if abs(p) < RS_EQUAL_TOL:
        for i in range(b):
            acc = 0.0
            for j in range(n):
                acc += lam[j] * np.log(x[i, j])
            out[i] = np.exp(acc)
        return out
    loglam = np.log(lam)
    lx = np.empty(n)
    for i in range(b):
        for j in range(n):
            lx[j] = np.log(x[i, j])
        out[i] = np.exp(_gini_exponent_s0(p, loglam, lx))
    return out


@njit(cache=True)
def _gini_exponent_s0(p, loglam, lx):
    # the s = 0 ratio exponent, arithmetic-identical to _gini_logs(p, 0, ...)
    n = lx.shape[0]
    amax = 0.0
    for i in range(n):
        if abs(lx[i]) > amax:
            amax = abs(lx[i])
    if abs(p) * amax < 0.5:
        m = -1.0e308
        for i in range(n):
            if loglam[i] > m:
                m = loglam[i]
        acc = 0.0
        den = 0.0
        for i in range(n):
            w = np.exp(loglam[i] - m)
            acc += w * np.expm1(p * lx[i])
            den += w
        return np.log1p(acc / den) / p
    return _lse_logs(p, loglam, lx) / p


@njit(cache=True)
def chi_batch(r, s, t):
    b = t.shape[0]
    out = np.empty(b)
    if abs(r - s) < RS_EQUAL_TOL:
        for i in range(b):
            lt = np.log(t[i])
            out[i] = np.exp(r * lt) * lt
        return out
    for i in range(b):
        lt = np.log(t[i])
        d = (r - s) * lt
        if abs(d) < 0.5:
            out[i] = np.exp(s * lt) * np.expm1(d) / (r - s)
        else:
            out[i] = (np.exp(r * lt) - np.exp(s * lt)) / (r - s)
    return out


@njit(cache=True)
def _jacobi_diagonalize(w):
    k = w.shape[0]
    for _ in range(_JACOBI_SWEEPS):
        norm2 = 0.0
        off2 = 0.0
        for p in range(k):
            for q in range(k):
                v = w[p, q] * w[p, q]
                norm2 += v
                if q > p:
                    off2 += v
        if off2 <= 1e-28 * max(norm2, 1e-300):
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = w[p, q]
                # rotations this small are identity to double precision
                if abs(apq) <= 1e-148 * (abs(w[p, p]) + abs(w[q, q]) + 1e-148):
                    continue
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for r_ in range(k):
                    wp = w[p, r_]
                    wq = w[q, r_]
                    w[p, r_] = c * wp - s * wq
                    w[q, r_] = s * wp + c * wq
                for r_ in range(k):
                    wp = w[r_, p]
                    wq = w[r_, q]
                    w[r_, p] = c * wp - s * wq
                    w[r_, q] = s * wp + c * wq


@njit(cache=True)
def eigvals_sym_batch(a):
    b, k, _ = a.shape
    out = np.empty((b, k))
    work = np.empty((k, k))
    for i in range(b):
        for p in range(k):
            for q in range(k):
                work[p, q] = a[i, p, q]
        _jacobi_diagonalize(work)
        for p in range(k):
            out[i, p] = work[p, p]
        out[i] = np.sort(out[i])
    return out


@njit(cache=True)
def deficiency_gini_batch(phi_kind, rs, lams, x):
    b, n, k = x.shape
    out = np.empty(b)
    loglams = np.log(lams)
    lrow = np.empty(n)
    lcol = np.empty(n)
    for t in range(b):
        for i in range(n):
            if phi_kind == 0:
                acc = 0.0
                for j in range(k):
                    acc += x[t, i, j]
            else:
                acc = 1.0
                for j in range(k):
                    acc *= x[t, i, j]
            lrow[i] = np.log(acc)
        lhs = _gini_logs(rs[0, 0], rs[0, 1], loglams[0], lrow)
        if phi_kind == 0:
            rhs = 0.0
        else:
            rhs = 1.0
        for j in range(k):
            for i in range(n):
                lcol[i] = np.log(x[t, i, j])
            m = _gini_logs(rs[j + 1, 0], rs[j + 1, 1], loglams[j + 1], lcol)
            if phi_kind == 0:
                rhs += m
            else:
                rhs *= m
        out[t] = rhs - lhs
    return out


@njit(cache=True)
def classify_shifted_batch(c0, c, zero_tol, rec_tol):
    b, k = c.shape
    out = np.empty(b, dtype=np.int64)
    for t in range(b):
        nneg = 0
        nzero = 0
        for i in range(k + 1):
            v = c0[t] if i == 0 else c[t, i - 1]
            if v < -zero_tol:
                nneg += 1
            elif abs(v) <= zero_tol:
                nzero += 1
        if nneg == 0:
            out[t] = PD if nzero <= 1 else PSD_ONLY
        elif nneg == 1 and nzero == 0:
            ssum = 0.0
            mrec = 0.0
            for i in range(k + 1):
                v = c0[t] if i == 0 else c[t, i - 1]
                rec = 1.0 / v
                ssum += rec
                if abs(rec) > mrec:
                    mrec = abs(rec)
            band = rec_tol * mrec
            if ssum < -band:
                out[t] = PD
            elif ssum <= band:
                out[t] = PSD_ONLY
            else:
                out[t] = INDEFINITE
        else:
            out[t] = INDEFINITE
    return out
