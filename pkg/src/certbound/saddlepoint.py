"""Saddlepoint solve, CDF/PDF approximations, and certified error envelopes.

The central objects are the approximation eta(theta, a, n) of the CDF of an
n-fold i.i.d. sum at threshold a under tilt theta, and envelopes that pair an
approximation with a proven additive error radius, so the exact CDF is
guaranteed to lie inside [lower, upper].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BadParams, NoConvergence, OutOfHull
from .tilt_core import (
    Distribution,
    TiltedMoments,
    gaussian_q,
    log_exp_times_q,
    tilted_moments,
)

_MAX_ITER = 200


@dataclass(frozen=True)
class SaddlepointSolve:
    """Solution of n * k1(theta) = a, with its residual and iteration count."""

    theta_star: float
    a: float
    n: int
    residual: float
    iterations: int


@dataclass(frozen=True)
class BoundEnvelope:
    """An approximation plus a certified additive radius.

    lower/upper are the radius-shifted center clamped to [0, 1];
    log_radius is the log of the additive error term, -inf when the
    radius underflows.  method tags which bound family produced the
    radius.
    """

    center: float
    lower: float
    upper: float
    log_radius: float
    method: str


def _envelope(center: float, log_radius: float, method: str) -> BoundEnvelope:
    center = min(max(center, 0.0), 1.0)
    radius = math.exp(log_radius) if log_radius < 0 else min(math.exp(log_radius), 1.0)
    return BoundEnvelope(
        center=center,
        lower=max(center - radius, 0.0),
        upper=min(center + radius, 1.0),
        log_radius=log_radius,
        method=method,
    )


def _check_n(n: int) -> int:
    if n < 1 or int(n) != n:
        raise BadParams(f"n must be a positive integer, got {n}")
    return int(n)


def solve_theta_star(dist: Distribution, n: int, a: float) -> SaddlepointSolve:
    """Unique tilt theta* with n * k1(theta*) = a.

    k1 is strictly increasing (k2 > 0), so a sign-preserving bracket always
    exists for a/n strictly inside the support hull.  Newton steps on k1
    with derivative k2 are taken whenever they stay inside the current
    bracket, otherwise the step falls back to bisection.
    """
    n = _check_n(n)
    a = float(a)
    x = a / n
    if not dist.support_min < x < dist.support_max:
        raise OutOfHull(
            f"a/n={x} outside open hull ({dist.support_min}, {dist.support_max})"
        )
    lo, hi = -1.0, 1.0
    while tilted_moments(dist, lo).k1 > x:
        lo *= 2.0
    while tilted_moments(dist, hi).k1 < x:
        hi *= 2.0
    tol = 1e-9 * max(1.0, abs(a))
    theta = 0.5 * (lo + hi)
    for it in range(_MAX_ITER):
        tm = tilted_moments(dist, theta)
        residual = n * tm.k1 - a
        if abs(residual) <= tol:
            return SaddlepointSolve(theta_star=theta, a=a, n=n,
                                    residual=residual, iterations=it)
        if tm.k1 > x:
            hi = theta
        else:
            lo = theta
        step = theta - residual / (n * tm.k2)
        theta = step if lo < step < hi else 0.5 * (lo + hi)
    raise NoConvergence(f"saddlepoint solve stalled at a={a}, n={n}")


def eta(dist: Distribution, theta: float, a: float, n: int) -> float:
    """Tilted-Gaussian CDF approximation at an arbitrary tilt.

    eta(theta, a, n) = 1{theta>0} + (-1)^{1{theta>0}}
        * exp(n k2 theta^2 / 2 + n k - n theta k1)
        * Q((-1)^{1{theta<=0}} (a + n theta k2 - n k1) / sqrt(n k2)),
    with all tilted moments taken at theta.  The exp * Q product is formed
    in the log domain; the result is clamped to [0, 1].  At theta = 0 this
    is the plain Gaussian CDF with the sum's mean and variance; at the
    saddlepoint it coincides with saddlepoint_cdf.
    """
    n = _check_n(n)
    tm = tilted_moments(dist, theta)
    return _eta_from_moments(tm, float(a), n)


def _eta_from_moments(tm: TiltedMoments, a: float, n: int) -> float:
    theta = tm.theta
    exponent = 0.5 * n * theta * theta * tm.k2 + n * tm.k - n * theta * tm.k1
    q_arg = (a + n * theta * tm.k2 - n * tm.k1) / math.sqrt(n * tm.k2)
    if theta <= 0.0:
        q_arg = -q_arg
    core = math.exp(log_exp_times_q(exponent, q_arg))
    value = 1.0 - core if theta > 0.0 else core
    return min(max(value, 0.0), 1.0)


def saddlepoint_cdf(dist: Distribution, n: int, a: float) -> float:
    """CDF approximation of the n-fold sum at a, evaluated at the saddlepoint."""
    solve = solve_theta_star(dist, n, a)
    return eta(dist, solve.theta_star, a, n)


def saddlepoint_pdf(dist: Distribution, n: int, x: float,
                    with_correction: bool = False) -> float:
    """Density approximation exp(n k - theta* x) / sqrt(2 pi n k2).

    With `with_correction` the leading 1/n term is applied:
    1 + (1/n) (k4 / (8 k2^2) - 5 c3^2 / (24 k2^3)), where k4 = c4 - 3 k2^2
    is the fourth tilted cumulant.
    """
    n = _check_n(n)
    solve = solve_theta_star(dist, n, x)
    tm = tilted_moments(dist, solve.theta_star)
    log_f = (n * tm.k - solve.theta_star * x
             - 0.5 * math.log(2.0 * math.pi * n * tm.k2))
    value = math.exp(log_f)
    if with_correction:
        k4 = tm.c4 - 3.0 * tm.k2 * tm.k2
        value *= 1.0 + (k4 / (8.0 * tm.k2**2)
                        - 5.0 * tm.c3**2 / (24.0 * tm.k2**3)) / n
    return value


def thm2_envelope(dist: Distribution, theta: float, a: float,
                  n: int) -> BoundEnvelope:
    """Envelope around eta at an arbitrary tilt.

    radius = exp(n k(theta) - theta a) * min{1, 2 xi(theta) / sqrt(n)}.
    """
    n = _check_n(n)
    a = float(a)
    tm = tilted_moments(dist, theta)
    center = _eta_from_moments(tm, a, n)
    log_radius = (n * tm.k - theta * a
                  + math.log(min(1.0, 2.0 * tm.xi / math.sqrt(n))))
    return _envelope(center, log_radius, "saddlepoint_thm2")


def thm3_envelope(dist: Distribution, n: int, a: float) -> BoundEnvelope:
    """thm2_envelope at theta = theta*(a); center is the saddlepoint CDF."""
    solve = solve_theta_star(dist, n, a)
    env = thm2_envelope(dist, solve.theta_star, a, n)
    return BoundEnvelope(center=env.center, lower=env.lower, upper=env.upper,
                         log_radius=env.log_radius, method="saddlepoint_thm3")


def berry_esseen_envelope(dist: Distribution, n: int, a: float) -> BoundEnvelope:
    """Gaussian center with the uniform radius min{1, xi(0)/sqrt(n)}."""
    n = _check_n(n)
    tm = tilted_moments(dist, 0.0)
    z = (float(a) - n * tm.k1) / math.sqrt(n * tm.k2)
    center = gaussian_q(-z)
    log_radius = math.log(min(1.0, tm.xi / math.sqrt(n)))
    return _envelope(center, log_radius, "berry_esseen")


def exponent_h(dist: Distribution, n: int, a: float) -> float:
    """Large-deviation exponent h(a) = n k(theta*) - theta* a, always <= 0.

    Nonpositive by convex duality; positive round-off is clamped to zero.
    """
    solve = solve_theta_star(dist, n, a)
    tm = tilted_moments(dist, solve.theta_star)
    return min(0.0, n * tm.k - solve.theta_star * float(a))
