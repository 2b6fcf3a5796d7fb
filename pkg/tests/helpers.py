"""Shared generators for the test suite."""

import math

import numpy as np

from meanineq import (
    BajraktarevicSpec,
    GiniMean,
    GiniParams,
    InequalityProblem,
    Interval,
    PhiSpec,
    WeightFunction,
    Weights,
)

POS = Interval(0.0, math.inf)


def rng_for(*salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(salt)))


def random_weights(rng, n: int) -> Weights:
    return Weights(rng.uniform(0.1, 1.0, n))


def random_gini(rng, n: int, low=-3.0, high=3.0) -> GiniMean:
    return GiniMean(
        GiniParams(float(rng.uniform(low, high)), float(rng.uniform(low, high))),
        random_weights(rng, n),
    )


def gini_problem(params_list, weights, phi_kind: str, box=None) -> InequalityProblem:
    """All-Gini problem from (r, s) pairs, outer first, shared weights."""
    w = Weights(weights)
    k = len(params_list) - 1
    if box is None:
        box = tuple(POS for _ in range(k))
    phi = PhiSpec.sum() if phi_kind == "sum" else PhiSpec.product()
    means = [GiniMean(GiniParams(*p), w) for p in params_list]
    return InequalityProblem(left=means[0], right=tuple(means[1:]), phi=phi, box=box)


def power_minkowski(p: float, k: int = 2, n: int = 2) -> InequalityProblem:
    """Subadditivity problem for the p-th power mean with equal weights."""
    return gini_problem([(p, 0.0)] * (k + 1), np.full(n, 1.0 / n), "sum")


def conjugate_hoelder(p: float, q: float, n: int = 2) -> InequalityProblem:
    """Arithmetic mean of products vs product of (p, q) power means."""
    return gini_problem(
        [(1.0, 0.0), (p, 0.0), (q, 0.0)], np.full(n, 1.0 / n), "product"
    )


def smooth_custom_spec(rng, n: int, domain=Interval(0.5, 3.0)) -> BajraktarevicSpec:
    """Random generalized mean with closed-form pieces: f = t**a, weights
    are positive quadratics."""
    a = float(rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0]))
    coeffs = rng.uniform(0.1, 2.0, (n, 3))
    weight_fns = tuple(
        WeightFunction(
            value=lambda t, c=c: c[0] + c[1] * t + c[2] * t * t,
            deriv=lambda t, c=c: c[1] + 2.0 * c[2] * t,
        )
        for c in coeffs
    )
    return BajraktarevicSpec(
        f=lambda t, a=a: t**a,
        f_deriv=lambda t, a=a: a * t ** (a - 1.0),
        f_inverse=lambda u, a=a: u ** (1.0 / a),
        f_second=lambda t, a=a: a * (a - 1.0) * t ** (a - 2.0),
        p=weight_fns,
        domain=domain,
    )


def custom_phi_problem(weights=(0.4, 0.6)) -> InequalityProblem:
    """Gini means coupled through a custom positive map on (0.5, 2)^2."""

    def value(y):
        return float(y[0] + y[1] + 0.5 * y[0] * y[1])

    def grad(y):
        return np.array([1.0 + 0.5 * y[1], 1.0 + 0.5 * y[0]])

    def hess(y):
        return np.array([[0.0, 0.5], [0.5, 0.0]])

    w = Weights(weights)
    phi = PhiSpec.custom(value, grad, hess, Interval(1.0, 7.0))
    return InequalityProblem(
        left=GiniMean(GiniParams(2.0, 1.0), w),
        right=(GiniMean(GiniParams(1.5, 0.0), w), GiniMean(GiniParams(2.5, 0.5), w)),
        phi=phi,
        box=(Interval(0.5, 2.0), Interval(0.5, 2.0)),
    )
