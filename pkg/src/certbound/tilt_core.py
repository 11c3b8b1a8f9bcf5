"""Finite-support distributions, exponentially tilted moments, and stable
Gaussian-tail primitives.

Every distribution handled by this package is a finite weighted support:
either a natively discrete law, or a quadrature discretization of a
continuous one.  Weights are carried as logs throughout; expectations are
log-sum-exp reductions with max subtraction, so tilts of several hundred
nats stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DegenerateVariance, QuadratureBudget, TiltOverflow

# Constants of the third-moment error coefficient xi = C1 * (T/V^{3/2} + C2).
XI_C1 = 0.33554
XI_C2 = 0.415

_SQRT2 = math.sqrt(2.0)
_SQRT_PI = 1.7724538509055160273
_MERGE_RTOL = 1e-12


def logsumexp(z: np.ndarray) -> float:
    """log(sum(exp(z))) with max subtraction; -inf for an empty array."""
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        return -math.inf
    m = float(np.max(z))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(z - m))))


# ---------------------------------------------------------------------------
# Scaled complementary error function and Q-function
# ---------------------------------------------------------------------------

def erfcx(x: float) -> float:
    """exp(x^2) * erfc(x), evaluated without intermediate overflow.

    Three regimes: a Maclaurin series for small |x|; for moderate x the
    trapezoidal expansion of (2x/pi) * integral exp(-t^2)/(x^2+t^2) dt,
    which converges like exp(-pi^2/h^2) plus an explicit correction for
    the poles at +-ix; and the asymptotic series for very large x.
    Relative accuracy is ~1e-15 on [0, 1e9].
    """
    x = float(x)
    if math.isnan(x):
        return x
    if x < 0.0:
        if x < -26.6:
            return math.inf  # 2 exp(x^2) overflows
        return 2.0 * math.exp(x * x) - erfcx(-x)
    if x <= 0.125:
        # erfcx = exp(x^2) (1 - erf(x)); the erf series has no cancellation here
        t = x * x
        term = x
        s = x
        k = 0
        while True:
            k += 1
            term *= -t / k
            c = term / (2 * k + 1)
            s += c
            if abs(c) <= 1e-18 * abs(s):
                break
        return math.exp(t) * (1.0 - 2.0 / _SQRT_PI * s)
    if x > 6.71e7:
        return (1.0 - 0.5 / (x * x)) / (_SQRT_PI * x)
    h = 0.45
    x2 = x * x
    s = 0.5 / x2
    for k in range(1, 17):
        kh = k * h
        s += math.exp(-kh * kh) / (kh * kh + x2)
    val = (h * x / math.pi) * 2.0 * s
    if x < 5.0:
        # residue of the integrand poles folded in by the trapezoid sum;
        # beyond x ~ 5 it is below 1e-19 relative and exp(x^2) would overflow
        val -= 2.0 * math.exp(x2) / math.expm1(2.0 * math.pi * x / h)
    return val


def gaussian_q(v: float) -> float:
    """Upper tail Q(v) = P[N(0,1) > v] of the standard Gaussian."""
    v = float(v)
    if v >= 0.0:
        return 0.5 * math.exp(-0.5 * v * v) * erfcx(v / _SQRT2)
    return 1.0 - gaussian_q(-v)


def log_gaussian_q(v: float) -> float:
    """ln Q(v), finite far into the upper tail (v up to ~1e154)."""
    v = float(v)
    if v >= 0.0:
        return -0.5 * v * v + math.log(0.5 * erfcx(v / _SQRT2))
    return math.log1p(-gaussian_q(-v))


def log_exp_times_q(u: float, v: float) -> float:
    """ln(exp(u) * Q(v)) without forming exp(u).

    For v >= 0 this is u - v^2/2 + ln(erfcx(v/sqrt2)/2); for v < 0 the
    Q factor is of order one and u + log1p(-Q(-v)) is exact.
    """
    return float(u) + log_gaussian_q(v)


# ---------------------------------------------------------------------------
# Distribution
# ---------------------------------------------------------------------------

def _merge_close(values: np.ndarray, log_weights: np.ndarray):
    """Sort and merge support points closer than 1e-12 relative (log-add)."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    lw = log_weights[order]
    if v.size > 1:
        gap = np.diff(v)
        tol = _MERGE_RTOL * np.maximum(1.0, np.abs(v[1:]))
        starts = np.concatenate([[0], np.nonzero(gap > tol)[0] + 1])
        if starts.size < v.size:
            merged_lw = np.logaddexp.reduceat(lw, starts)
            ends = np.concatenate([starts[1:], [v.size]])
            merged_v = np.array([v[s:e].mean() for s, e in zip(starts, ends)])
            return merged_v, merged_lw
    return v, lw


@dataclass(frozen=True)
class Distribution:
    """A probability law on a finite, strictly increasing real support.

    Construction canonicalizes the input: points are sorted, near-duplicate
    values merged by log-add, and log-weights normalized so that they
    log-sum-exp to zero.  `kind` is "exact_discrete" for native discrete
    laws and "quadrature" for grid discretizations of continuous ones, in
    which case `source` describes the originating density and grid.
    """

    values: np.ndarray
    log_weights: np.ndarray
    kind: str = "exact_discrete"
    source: str | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        lw = np.asarray(self.log_weights, dtype=float).ravel()
        if v.shape != lw.shape:
            raise BadParams("values and log_weights must have equal length")
        if not np.all(np.isfinite(v)):
            raise BadParams("support values must be finite")
        if np.any(np.isnan(lw)) or np.any(lw == math.inf):
            raise BadParams("log weights must be < inf and not NaN")
        if self.kind not in ("exact_discrete", "quadrature"):
            raise BadParams(f"unknown distribution kind {self.kind!r}")
        keep = lw > -math.inf
        v, lw = v[keep], lw[keep]
        v, lw = _merge_close(v, lw)
        if v.size < 2:
            raise BadParams("need at least 2 distinct support points")
        lw = lw - logsumexp(lw)
        v.setflags(write=False)
        lw.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "log_weights", lw)

    def __len__(self) -> int:
        return self.values.size

    @property
    def support_min(self) -> float:
        return float(self.values[0])

    @property
    def support_max(self) -> float:
        return float(self.values[-1])

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def mean(self) -> float:
        return float(self.weights() @ self.values)

    def variance(self) -> float:
        w = self.weights()
        m = float(w @ self.values)
        return float(w @ (self.values - m) ** 2)

    @classmethod
    def from_probs(cls, values, probs, kind="exact_discrete", source=None):
        probs = np.asarray(probs, dtype=float)
        if np.any(probs < 0):
            raise BadParams("probabilities must be nonnegative")
        with np.errstate(divide="ignore"):
            lw = np.log(probs)
        return cls(np.asarray(values, dtype=float), lw, kind=kind, source=source)


@dataclass(frozen=True)
class TiltedMoments:
    """Moments of the exponentially tilted law at one tilt theta.

    k is the log weight-function value (zero at theta = 0), k1/k2 the
    tilted mean and variance, c3/c4 the signed third and fourth central
    tilted moments, t3_abs the absolute third central tilted moment, and
    xi the Berry-Esseen style coefficient XI_C1*(t3_abs/k2^{3/2} + XI_C2).
    """

    theta: float
    k: float
    k1: float
    k2: float
    c3: float
    c4: float
    t3_abs: float
    xi: float


def tilted_moments(dist: Distribution, theta: float) -> TiltedMoments:
    """Log-weight value and central moments of `dist` tilted by exp(theta*y).

    All reductions run through log-sum-exp; the tilted probabilities are
    exponentiated only after max subtraction, so arbitrarily large values
    of theta*y are safe as long as the result itself is finite.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise BadParams("theta must be finite")
    v = dist.values
    with np.errstate(over="ignore"):
        z = theta * v + dist.log_weights
    k = logsumexp(z)
    if not math.isfinite(k):
        raise TiltOverflow(f"tilt theta={theta} overflows the weight function")
    q = np.exp(z - k)
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = float(q @ v)
        c = v - k1
        c2 = c * c
        k2 = float(q @ c2)
        t3_abs = float(q @ (np.abs(c) * c2))
        c3 = float(q @ (c * c2))
        c4 = float(q @ (c2 * c2))
    if not all(map(math.isfinite, (k1, k2, c3, c4, t3_abs))):
        raise TiltOverflow(f"tilted moments overflow at theta={theta}")
    if k2 <= 1e-300:
        raise DegenerateVariance(f"tilted variance {k2} at theta={theta}")
    xi = XI_C1 * (t3_abs / k2**1.5 + XI_C2)
    return TiltedMoments(theta=theta, k=k, k1=k1, k2=k2, c3=c3, c4=c4,
                         t3_abs=t3_abs, xi=xi)


def tilt_distribution(dist: Distribution, theta: float) -> Distribution:
    """The exponentially tilted law: reweight by exp(theta*y), renormalize."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise BadParams("theta must be finite")
    with np.errstate(over="ignore"):
        z = theta * dist.values + dist.log_weights
    k = logsumexp(z)
    if not math.isfinite(k):
        raise TiltOverflow(f"tilt theta={theta} overflows the weight function")
    return Distribution(dist.values, z - k, kind=dist.kind, source=dist.source)


# ---------------------------------------------------------------------------
# Ready-made distributions
# ---------------------------------------------------------------------------

def bernoulli(p: float) -> Distribution:
    """Bernoulli(p) on {0, 1}."""
    if not 0.0 < p < 1.0:
        raise BadParams("bernoulli p must be in (0, 1)")
    return Distribution(np.array([0.0, 1.0]),
                        np.array([math.log1p(-p), math.log(p)]))


def _hermite_log_weights(nodes: int):
    """Gauss-Hermite nodes/log-weights for the standard normal measure.

    Nodes whose weight underflows to zero are dropped; they carry no
    double-precision mass.
    """
    from scipy.special import roots_hermite

    if nodes < 3:
        raise QuadratureBudget(f"need at least 3 quadrature nodes, got {nodes}")
    x, w = roots_hermite(nodes)
    keep = w > 0.0
    x, w = x[keep], w[keep]
    return _SQRT2 * x, np.log(w) - 0.5 * math.log(math.pi)


def gaussian_quadrature(mean: float = 0.0, var: float = 1.0,
                        nodes: int = 257) -> Distribution:
    """Gauss-Hermite discretization of N(mean, var)."""
    if var <= 0.0:
        raise BadParams("variance must be positive")
    z, lw = _hermite_log_weights(nodes)
    return Distribution(mean + math.sqrt(var) * z, lw, kind="quadrature",
                        source=f"gaussian(mean={mean},var={var},nodes={nodes})")


def chi_squared_quadrature(nodes: int = 2001) -> Distribution:
    """Chi-squared with one degree of freedom, as the image Z^2 of
    Gauss-Hermite nodes for a standard normal Z.

    Symmetric nodes map to identical squared values and are merged at
    construction, halving the support size.
    """
    z, lw = _hermite_log_weights(nodes)
    return Distribution(z * z, lw, kind="quadrature",
                        source=f"chi_squared(k=1,nodes={nodes})")
