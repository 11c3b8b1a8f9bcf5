"""Ground-truth engines: exact sum CDFs and seeded Monte Carlo estimators.

The Monte Carlo sampler draws from a finite support through a Walker alias
table driven by a SplitMix64 counter stream, compiled with numba.  The
stream is split into fixed-size shards with per-shard derived states and an
ordered reduction, so the estimate depends only on (seed, samples), never
on how shards are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import gammainc, gammaln

from .errors import BadParams, TooLarge
from .tilt_core import Distribution, gaussian_q, logsumexp

_MAX_PAIRWISE = 40_000_000
_MAX_SUPPORT = 1_000_000
_SHARD_SIZE = 1 << 19
_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Exact engines
# ---------------------------------------------------------------------------

def _convolve_pair(a: Distribution, b: Distribution) -> Distribution:
    if len(a) * len(b) > _MAX_PAIRWISE:
        raise TooLarge(f"pairwise convolution of {len(a)} x {len(b)} points")
    v = np.add.outer(a.values, b.values).ravel()
    lw = np.add.outer(a.log_weights, b.log_weights).ravel()
    return Distribution(v, lw, kind="exact_discrete")


def convolve_sum(dist: Distribution, n: int) -> Distribution:
    """Exact law of the n-fold i.i.d. sum by iterated discrete convolution."""
    if dist.kind != "exact_discrete":
        raise BadParams("exact convolution requires an exact_discrete law")
    if n < 1 or int(n) != n:
        raise BadParams(f"n must be a positive integer, got {n}")
    if n * len(dist) > _MAX_SUPPORT:
        raise TooLarge(f"n*s = {n * len(dist)} exceeds the support budget")
    acc = dist
    for _ in range(int(n) - 1):
        acc = _convolve_pair(acc, dist)
        if len(acc) > _MAX_SUPPORT:
            raise TooLarge(f"merged support grew to {len(acc)} points")
    return acc


def cdf_of(dist: Distribution, a: float) -> float:
    """CDF of a finite-support law: total weight of values <= a."""
    idx = np.searchsorted(dist.values, a, side="right")
    if idx == 0:
        return 0.0
    return min(1.0, math.exp(logsumexp(dist.log_weights[:idx])))


def binomial_log_pmf(n: int, p: float) -> np.ndarray:
    """log pmf of Binomial(n, p) on k = 0..n, via log-gamma."""
    if n < 1 or not 0.0 < p < 1.0:
        raise BadParams(f"binomial needs n >= 1 and p in (0,1), got {n}, {p}")
    k = np.arange(n + 1, dtype=float)
    return (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
            + k * math.log(p) + (n - k) * math.log1p(-p))


def exact_cdf(family: str, a: float, **params) -> float:
    """Closed-form CDF oracles.

    families: "binomial" (n, p) by stable pmf summation; "gamma"
    (shape, scale) by the regularized incomplete gamma; "gaussian"
    (mean, var) through the Q-function.
    """
    a = float(a)
    if family == "binomial":
        try:
            n, p = int(params["n"]), float(params["p"])
        except KeyError as exc:
            raise BadParams(f"binomial requires parameter {exc}") from exc
        lp = binomial_log_pmf(n, p)
        k = math.floor(a)
        if k < 0:
            return 0.0
        if k >= n:
            return 1.0
        return min(1.0, float(np.exp(lp[: k + 1]).sum()))
    if family == "gamma":
        try:
            shape, scale = float(params["shape"]), float(params["scale"])
        except KeyError as exc:
            raise BadParams(f"gamma requires parameter {exc}") from exc
        if shape <= 0 or scale <= 0:
            raise BadParams("gamma shape and scale must be positive")
        if a <= 0.0:
            return 0.0
        return float(gammainc(shape, a / scale))
    if family == "gaussian":
        try:
            mean, var = float(params["mean"]), float(params["var"])
        except KeyError as exc:
            raise BadParams(f"gaussian requires parameter {exc}") from exc
        if var <= 0:
            raise BadParams("gaussian variance must be positive")
        return gaussian_q(-(a - mean) / math.sqrt(var))
    raise BadParams(f"unknown closed-form family {family!r}")


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    """A seeded Monte Carlo probability estimate with its 95% interval."""

    value: float
    stderr: float
    samples: int
    ci95_low: float
    ci95_high: float
    seed: int


def _mix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def _shard_state(seed: int, shard: int) -> int:
    # two mixing rounds decorrelate the per-shard SplitMix64 streams
    return _mix64(_mix64(seed & _MASK64) ^ ((shard * 0x9E3779B97F4A7C15 + 1) & _MASK64))


def build_alias_table(weights: np.ndarray):
    """Vose alias table (prob, alias) for O(1) draws from a finite pmf."""
    w = np.asarray(weights, dtype=float)
    s = w.size
    scaled = (w / w.sum()) * s
    prob = np.ones(s)
    alias = np.arange(s, dtype=np.int64)
    small = [i for i in range(s) if scaled[i] < 1.0]
    large = [i for i in range(s) if scaled[i] >= 1.0]
    while small and large:
        sm = small.pop()
        lg = large.pop()
        prob[sm] = scaled[sm]
        alias[sm] = lg
        scaled[lg] = (scaled[lg] + scaled[sm]) - 1.0
        (small if scaled[lg] < 1.0 else large).append(lg)
    return prob, alias


@njit(cache=True)
def _sum_cdf_hits(values, prob, alias, n, samples, state0, threshold):
    """Count samples whose n-draw sum is <= threshold.

    One SplitMix64 output per draw: the top 53 bits make the uniform that
    picks the alias-table column, its fractional remainder decides the
    column-vs-alias branch (valid because the within-column offset is
    uniform conditional on the column).
    """
    gamma = np.uint64(0x9E3779B97F4A7C15)
    c1 = np.uint64(0xBF58476D1CE4E5B9)
    c2 = np.uint64(0x94D049BB133111EB)
    state = np.uint64(state0)
    s_len = len(prob)
    hits = 0
    for _ in range(samples):
        acc = 0.0
        for _ in range(n):
            state = state + gamma
            z = state
            z = (z ^ (z >> np.uint64(30))) * c1
            z = (z ^ (z >> np.uint64(27))) * c2
            z = z ^ (z >> np.uint64(31))
            u = (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
            f = u * s_len
            k = int(f)
            if f - k >= prob[k]:
                k = alias[k]
            acc += values[k]
        if acc <= threshold:
            hits += 1
    return hits


def _mc_sum_probability(dist: Distribution, n: int, a: float, samples: int,
                        seed: int) -> McEstimate:
    if samples < 10_000:
        raise BadParams(f"need at least 1e4 samples, got {samples}")
    if n < 1 or int(n) != n:
        raise BadParams(f"n must be a positive integer, got {n}")
    prob, alias = build_alias_table(np.exp(dist.log_weights))
    values = np.ascontiguousarray(dist.values)
    hits = 0
    done = 0
    shard = 0
    while done < samples:
        count = min(_SHARD_SIZE, samples - done)
        hits += int(_sum_cdf_hits(values, prob, alias, int(n), count,
                                  np.uint64(_shard_state(seed, shard)),
                                  float(a)))
        done += count
        shard += 1
    p = hits / samples
    stderr = math.sqrt(p * (1.0 - p) / samples)
    return McEstimate(value=p, stderr=stderr, samples=samples,
                      ci95_low=p - 1.96 * stderr, ci95_high=p + 1.96 * stderr,
                      seed=seed)


def mc_cdf(dist: Distribution, n: int, a: float, samples: int,
           seed: int) -> McEstimate:
    """Estimate P[sum of n i.i.d. draws <= a] by plain Monte Carlo."""
    return _mc_sum_probability(dist, n, a, samples, seed)


def mc_fbl(channel_density_dist: Distribution, n: int, threshold_log: float,
           samples: int, seed: int) -> McEstimate:
    """Estimate P[sum of n information-density draws <= threshold_log].

    The complement (strict upper tail) of the same estimate serves the
    independent-measure terms of the finite-blocklength bounds.
    """
    return _mc_sum_probability(channel_density_dist, n, threshold_log,
                               samples, seed)
