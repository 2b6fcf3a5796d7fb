"""Mean families and their building blocks.

Covers the weighted two-parameter (Gini) means with their logarithmic branch,
weighted power means, generalized weighted quasi-arithmetic means with
coordinatewise weight functions, and the curvature function ``chi`` through
which the pointwise global-validity conditions are expressed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from ._backend import kernels
from .errors import (
    CapabilityError,
    ConstructionError,
    DomainError,
    NumericError,
    ShapeError,
)

#: |r - s| below this selects the logarithmic branch (matches the kernels).
RS_EQUAL_TOL = kernels.RS_EQUAL_TOL

#: Unbounded interval ends are capped here when a finite grid is needed.
GRID_CAP = 1e6

#: Fraction clipped off each end when sampling an open interval's interior.
GRID_CLIP = 0.01


@dataclass(frozen=True)
class GiniParams:
    """Exponent pair (r, s); values within RS_EQUAL_TOL of each other are
    evaluated on the logarithmic branch."""

    r: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.s)):
            raise ConstructionError("mean exponents must be finite")

    @property
    def log_branch(self) -> bool:
        return abs(self.r - self.s) < RS_EQUAL_TOL


class Weights:
    """Strictly positive weight vector, normalized to unit sum on construction."""

    __slots__ = ("lam",)

    def __init__(self, lam: Sequence[float]):
        arr = np.asarray(lam, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ShapeError("weights must be a nonempty 1-D vector")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ConstructionError("weights must be finite and strictly positive")
        arr = arr / arr.sum()
        arr.flags.writeable = False
        self.lam = arr

    @property
    def n(self) -> int:
        return self.lam.size

    @classmethod
    def equal(cls, n: int) -> "Weights":
        return cls(np.full(n, 1.0 / n))

    def __len__(self) -> int:
        return self.lam.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Weights) and np.array_equal(self.lam, other.lam)

    def __repr__(self) -> str:
        return f"Weights({self.lam.tolist()})"


@dataclass(frozen=True)
class Interval:
    """Open interval with extended-real endpoints; membership is strict."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ConstructionError("interval endpoints must not be NaN")
        if not self.lo < self.hi:
            raise ConstructionError(f"empty interval ({self.lo}, {self.hi})")

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > self.lo) & (x < self.hi)))

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    @property
    def is_positive(self) -> bool:
        return self.lo >= 0.0

    def finite_bounds(self, geometric: bool) -> tuple[float, float]:
        """Endpoint pair with unbounded ends capped for grid construction.

        Caps never cross a finite endpoint, so the pair is always ordered.
        """
        if geometric:
            if math.isfinite(self.hi):
                hi = self.hi
            elif self.lo > 0.0:
                hi = max(GRID_CAP, self.lo * 1e3)
            else:
                hi = GRID_CAP
            lo = self.lo if self.lo > 0.0 else min(1.0 / GRID_CAP, hi * 1e-3)
            return lo, hi
        if math.isfinite(self.lo):
            lo = self.lo
        else:
            lo = min(-GRID_CAP, self.hi - 1.0) if math.isfinite(self.hi) else -GRID_CAP
        hi = self.hi if math.isfinite(self.hi) else max(GRID_CAP, lo + 1.0)
        return lo, hi

    def interior_points(self, m: int, geometric: bool | None = None) -> np.ndarray:
        """m points in the interior, clipping GRID_CLIP off each end.

        Geometric (log-spaced) placement is the default on positive axes,
        equispaced otherwise.  Unbounded ends are capped at +-GRID_CAP
        (1/GRID_CAP below on log axes).
        """
        if m < 1:
            raise ShapeError("need at least one grid point")
        if geometric is None:
            geometric = self.is_positive
        lo, hi = self.finite_bounds(geometric)
        if geometric:
            llo, lhi = math.log(lo), math.log(hi)
            pad = GRID_CLIP * (lhi - llo)
            return np.exp(np.linspace(llo + pad, lhi - pad, m))
        pad = GRID_CLIP * (hi - lo)
        return np.linspace(lo + pad, hi - pad, m)

    def midpoint(self, geometric: bool | None = None) -> float:
        if geometric is None:
            geometric = self.is_positive
        lo, hi = self.finite_bounds(geometric)
        if geometric:
            return math.exp(0.5 * (math.log(lo) + math.log(hi)))
        return 0.5 * (lo + hi)


POSITIVE_REALS = Interval(0.0, math.inf)


def _as_batch(x, n: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
        squeeze = True
    elif arr.ndim == 2:
        squeeze = False
    else:
        raise ShapeError("x must be a vector or a (batch, n) array")
    if arr.shape[1] != n:
        raise ShapeError(f"expected {n} entries per instance, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("input entries must be finite")
    if np.any(arr <= 0.0):
        raise DomainError("input entries must be strictly positive")
    return arr, squeeze


def gini_mean(params: GiniParams, w: Weights, x) -> Union[float, np.ndarray]:
    """Weighted two-parameter mean of x.

    x may be a length-n vector (returns a float) or a (batch, n) array
    (returns a 1-D array).  Evaluation runs in log space so large exponents
    do not overflow.
    """
    arr, squeeze = _as_batch(x, w.n)
    out = kernels.gini_mean_batch(float(params.r), float(params.s), w.lam, arr)
    return float(out[0]) if squeeze else out


def power_mean(p: float, w: Weights, x) -> Union[float, np.ndarray]:
    """Weighted power mean of x; p == 0 gives the weighted geometric mean."""
    arr, squeeze = _as_batch(x, w.n)
    out = kernels.power_mean_batch(float(p), w.lam, arr)
    return float(out[0]) if squeeze else out


def chi(params: GiniParams, t) -> Union[float, np.ndarray]:
    """(t**r - t**s)/(r - s) for r != s, t**r * log(t) on the log branch."""
    arr = np.asarray(t, dtype=float)
    squeeze = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("chi requires strictly positive arguments")
    out = kernels.chi_batch(float(params.r), float(params.s), arr)
    return float(out[0]) if squeeze else out


@dataclass(frozen=True)
class WeightFunction:
    """Coordinate weight map; the derivative is required only by the
    second-order diagonal calculus."""

    value: Callable[[float], float]
    deriv: Callable[[float], float] | None = None


@dataclass(frozen=True)
class Convexifier:
    """Strictly monotone change of variables whose composed-map curvature
    encodes local validity; ``inverse(value(t)) == t`` on the domain."""

    value: Callable[[float], float]
    inverse: Callable[[float], float]


@dataclass(frozen=True)
class BajraktarevicSpec:
    """Generalized weighted quasi-arithmetic mean: f-inverse of the
    p-weighted average of f values, with one weight function per slot.

    ``f_deriv`` must not vanish on the domain and every weight function must
    be strictly positive there; both are spot-checked on a sample grid at
    construction.  ``f_second`` and the weight derivatives are needed only
    for second-order operations, ``convexifier`` only for the concavity
    probe.
    """

    f: Callable[[float], float]
    f_deriv: Callable[[float], float]
    f_inverse: Callable[[float], float]
    p: tuple[WeightFunction, ...]
    domain: Interval
    f_second: Callable[[float], float] | None = None
    convexifier: Convexifier | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(self.p))
        if len(self.p) < 1:
            raise ConstructionError("need at least one weight function")
        pts = self.domain.interior_points(33)
        fp = np.array([self.f_deriv(t) for t in pts], dtype=float)
        if not np.all(np.isfinite(fp)) or np.any(fp == 0.0) or (
            np.any(fp > 0.0) and np.any(fp < 0.0)
        ):
            raise ConstructionError("generator derivative must be nonvanishing of one sign")
        for ell, wf in enumerate(self.p):
            vals = np.array([wf.value(t) for t in pts], dtype=float)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
                raise ConstructionError(f"weight function {ell} must be strictly positive")

    @property
    def n(self) -> int:
        return len(self.p)

    def p0(self, t: float) -> float:
        return sum(wf.value(t) for wf in self.p)

    def p0_deriv(self, t: float) -> float:
        if any(wf.deriv is None for wf in self.p):
            raise CapabilityError("weight-function derivatives not supplied")
        return sum(wf.deriv(t) for wf in self.p)

    @property
    def has_second_order(self) -> bool:
        return self.f_second is not None and all(wf.deriv is not None for wf in self.p)


def bajraktarevic_mean(spec: BajraktarevicSpec, x) -> float:
    """f-inverse of the p-weighted average of f values at x."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size != spec.n:
        raise ShapeError(f"expected a length-{spec.n} vector")
    if not spec.domain.contains(arr):
        raise DomainError("input outside the mean's domain")
    num = 0.0
    den = 0.0
    for ell in range(spec.n):
        w = spec.p[ell].value(arr[ell])
        num += w * spec.f(arr[ell])
        den += w
    try:
        val = spec.f_inverse(num / den)
    except (ArithmeticError, ValueError) as exc:
        raise NumericError("generator inverse failed") from exc
    val = float(val)
    if not math.isfinite(val):
        raise NumericError("mean evaluated to a non-finite value")
    return val


@dataclass(frozen=True)
class GiniMean:
    """A two-parameter mean bundled with its weights; domain is (0, inf)."""

    params: GiniParams
    weights: Weights

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def domain(self) -> Interval:
        return POSITIVE_REALS

    def __call__(self, x):
        return gini_mean(self.params, self.weights, x)


MeanSpec = Union[GiniMean, BajraktarevicSpec]


def mean_value(mean: MeanSpec, x) -> float:
    if isinstance(mean, GiniMean):
        return gini_mean(mean.params, mean.weights, x)
    return bajraktarevic_mean(mean, x)


def mean_n(mean: MeanSpec) -> int:
    return mean.n


def mean_domain(mean: MeanSpec) -> Interval:
    return mean.domain


def generator_sign(mean: MeanSpec) -> float:
    """Sign of the generator's derivative on the domain (+1.0 or -1.0)."""
    if isinstance(mean, GiniMean):
        if mean.params.log_branch:
            return 1.0
        return 1.0 if mean.params.r > mean.params.s else -1.0
    return 1.0 if mean.f_deriv(mean.domain.midpoint()) > 0.0 else -1.0


def gini_convexifier(params: GiniParams) -> Convexifier:
    """Closed-form antiderivative of (weight sum)^2 * f' for a Gini mean.

    With p0(t) = t**s this is c*t**(r+s) with c = (r-s)/(r+s) when both
    branches are regular, (r-s)*log t when r+s == 0, t**(2s)/(2s) on the
    logarithmic branch, and log t when r == s == 0.
    """
    r, s = params.r, params.s
    if params.log_branch:
        two_s = r + s  # equals 2s up to the branch tolerance
        if abs(two_s) < RS_EQUAL_TOL:
            return Convexifier(value=math.log, inverse=math.exp)
        return Convexifier(
            value=lambda t, a=two_s: t**a / a,
            inverse=lambda u, a=two_s: (a * u) ** (1.0 / a),
        )
    if abs(r + s) < RS_EQUAL_TOL:
        return Convexifier(
            value=lambda t, d=r - s: d * math.log(t),
            inverse=lambda u, d=r - s: math.exp(u / d),
        )
    c = (r - s) / (r + s)
    return Convexifier(
        value=lambda t, a=r + s, c=c: c * t**a,
        inverse=lambda u, a=r + s, c=c: (u / c) ** (1.0 / a),
    )


def gini_as_bajraktarevic(mean: GiniMean) -> BajraktarevicSpec:
    """Express a Gini mean through its generator and weight functions
    (f = t**(r-s) with weights lam*t**s, or f = log on the log branch)."""
    r, s = mean.params.r, mean.params.s
    lam = mean.weights.lam
    if mean.params.log_branch:
        f = math.log
        f_deriv = lambda t: 1.0 / t
        f_second = lambda t: -1.0 / (t * t)
        f_inverse = math.exp
    else:
        d = r - s
        f = lambda t, d=d: t**d
        f_deriv = lambda t, d=d: d * t ** (d - 1.0)
        f_second = lambda t, d=d: d * (d - 1.0) * t ** (d - 2.0)
        f_inverse = lambda u, d=d: u ** (1.0 / d)
    wfs = tuple(
        WeightFunction(
            value=lambda t, c=float(c), s=s: c * t**s,
            deriv=lambda t, c=float(c), s=s: c * s * t ** (s - 1.0),
        )
        for c in lam
    )
    return BajraktarevicSpec(
        f=f,
        f_deriv=f_deriv,
        f_inverse=f_inverse,
        p=wfs,
        domain=POSITIVE_REALS,
        f_second=f_second,
        convexifier=gini_convexifier(mean.params),
    )
