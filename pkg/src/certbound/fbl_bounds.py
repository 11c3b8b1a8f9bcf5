"""Achievability (DT) and converse (MC) finite-blocklength bound stacks.

Each stack produces, at one (n, rate) point, a normal-approximation triple
(lower, center, upper) and a saddlepoint triple with certified sandwich
bounds, plus the exact value for the BSC where the flip-count reduction
makes both bound functions exactly computable.

Message counts follow the curve convention M = 2^{n R} taken as a real
number; thresholds ln((M-1)/2) are evaluated through log1p so blocklengths
far beyond 64-bit integer range stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channels import DensityBuild
from .errors import BadParams, NoBracket
from .oracle import binomial_log_pmf
from .saddlepoint import solve_theta_star
from .tilt_core import (
    TiltedMoments,
    gaussian_q,
    log_exp_times_q,
    logsumexp,
    tilted_moments,
)

LN2 = math.log(2.0)

_GAMMA_GRID = 65
_GAMMA_FALLBACK_GRID = 512
_GAMMA_TOL = 1e-6
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def log_m_from_rate(n: int, rate: float) -> float:
    """ln M for M = 2^{n*rate}."""
    return n * rate * LN2


def dt_threshold(n: int, rate: float) -> float:
    """ln((M-1)/2) for M = 2^{n*rate}, stable for any n*rate > 0."""
    lm = log_m_from_rate(n, rate)
    return lm + math.log(-math.expm1(-lm)) - LN2


@dataclass(frozen=True)
class NormalTriple:
    """Normal-approximation center with its certified lower/upper bounds."""

    d: float
    alpha: float
    n_upper: float


@dataclass(frozen=True)
class SaddleTriple:
    """Saddlepoint center (beta) with its certified lower/upper bounds."""

    g: float
    beta: float
    s: float


@dataclass(frozen=True)
class BoundComponents:
    """Per-term pieces of the sandwich: the two CDF/tail approximations,
    their certified lower bounds before clipping, and per-term intervals."""

    beta1: float
    beta2: float
    g1: float
    g2: float
    log_r1: float
    log_r2: float
    joint_lo: float
    joint_hi: float
    ind_lo: float
    ind_hi: float


@dataclass(frozen=True)
class FblPoint:
    """One (n, rate) evaluation of a DT or MC bound stack."""

    flavor: str
    n: int
    rate: float
    log2_m: float
    threshold_log: float
    gamma: float | None
    theta: float
    theta_residual: float
    normal: NormalTriple
    sp: SaddleTriple
    components: BoundComponents
    exact: float | None
    flags: tuple[str, ...]


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------

def dt_tilted_stats(density: DensityBuild, theta: float) -> TiltedMoments:
    """Tilted moments of the information density under the joint measure."""
    return tilted_moments(density.joint_density_dist, theta)


def mc_tilted_stats(density: DensityBuild, theta: float) -> TiltedMoments:
    """With the reference output law equal to the channel marginal, the MC
    information density coincides with the DT one."""
    return dt_tilted_stats(density, theta)


def _solve_tilt(density: DensityBuild, n: int, threshold_log: float):
    return solve_theta_star(density.joint_density_dist, n, threshold_log)


def dt_solve_theta(density: DensityBuild, n: int, rate: float) -> float:
    """Tilt matching the tilted mean to the DT threshold ln((M-1)/2)."""
    return _solve_tilt(density, n, dt_threshold(n, rate)).theta_star


def mc_solve_theta(density: DensityBuild, n: int, ln_gamma: float) -> float:
    """Tilt matching the tilted mean to the MC threshold ln(gamma)."""
    return _solve_tilt(density, n, float(ln_gamma)).theta_star


def _beta_pair(tm: TiltedMoments, n: int, threshold_log: float):
    """CDF approximation under the joint measure and tail approximation
    under the independent measure, expressed through the joint moments at
    the shifted tilt theta+1."""
    theta = tm.theta
    root = math.sqrt(n * tm.k2)
    e1 = n * tm.k - theta * threshold_log + 0.5 * theta * theta * n * tm.k2
    core1 = math.exp(log_exp_times_q(e1, root * abs(theta)))
    beta1 = 1.0 - core1 if theta > 0.0 else core1
    t1 = theta + 1.0
    e2 = n * tm.k - t1 * threshold_log + 0.5 * t1 * t1 * n * tm.k2
    core2 = math.exp(log_exp_times_q(e2, root * abs(t1)))
    beta2 = 1.0 - core2 if theta <= -1.0 else core2
    beta1 = min(max(beta1, 0.0), 1.0)
    beta2 = min(max(beta2, 0.0), 1.0)
    log_r1 = n * tm.k - theta * threshold_log + math.log(2.0 * tm.xi / math.sqrt(n))
    log_r2 = n * tm.k - t1 * threshold_log + math.log(2.0 * tm.xi / math.sqrt(n))
    return beta1, beta2, log_r1, log_r2


def dt_beta1(density: DensityBuild, n: int, rate: float, theta: float) -> float:
    tm = dt_tilted_stats(density, theta)
    return _beta_pair(tm, n, dt_threshold(n, rate))[0]


def dt_beta2(density: DensityBuild, n: int, rate: float, theta: float) -> float:
    tm = dt_tilted_stats(density, theta)
    return _beta_pair(tm, n, dt_threshold(n, rate))[1]


def mc_beta1(density: DensityBuild, n: int, ln_gamma: float, theta: float) -> float:
    tm = dt_tilted_stats(density, theta)
    return _beta_pair(tm, n, float(ln_gamma))[0]


def mc_beta2(density: DensityBuild, n: int, ln_gamma: float, theta: float) -> float:
    tm = dt_tilted_stats(density, theta)
    return _beta_pair(tm, n, float(ln_gamma))[1]


def _components(tm: TiltedMoments, n: int, threshold_log: float) -> BoundComponents:
    beta1, beta2, log_r1, log_r2 = _beta_pair(tm, n, threshold_log)
    r1 = math.exp(log_r1)
    r2 = math.exp(log_r2)
    g1 = beta1 - r1
    g2 = beta2 - r2
    return BoundComponents(
        beta1=beta1, beta2=beta2, g1=g1, g2=g2, log_r1=log_r1, log_r2=log_r2,
        joint_lo=max(0.0, g1), joint_hi=min(1.0, beta1 + r1),
        ind_lo=max(0.0, g2), ind_hi=min(1.0, beta2 + r2),
    )


def _log_scaled(log_scale: float, value: float) -> float:
    """exp(log_scale) * value without forming exp(log_scale) first."""
    if value <= 0.0:
        return 0.0
    return math.exp(log_scale + math.log(value))


def _normal_triple(density: DensityBuild, n: int, threshold_log: float,
                   penalty: float) -> NormalTriple:
    tm = dt_tilted_stats(density, 0.0)
    rn = math.sqrt(n)
    alpha = gaussian_q((n * tm.k1 - threshold_log) / math.sqrt(n * tm.k2)) - penalty
    d = max(0.0, alpha - tm.xi / rn)
    upper = min(1.0, alpha + 5.0 * tm.xi / rn
                + 2.0 * LN2 / math.sqrt(2.0 * math.pi * n * tm.k2))
    return NormalTriple(d=d, alpha=alpha, n_upper=upper)


def dt_normal(density: DensityBuild, n: int, rate: float) -> NormalTriple:
    """Gaussian center Q((n mu - ln((M-1)/2)) / sqrt(n V)) with its
    certified lower/upper corrections."""
    return _normal_triple(density, n, dt_threshold(n, rate), 0.0)


def mc_normal(density: DensityBuild, n: int, rate: float,
              ln_gamma: float) -> NormalTriple:
    """MC counterpart at threshold ln(gamma), with the gamma/M penalty
    folded into the center."""
    penalty = math.exp(float(ln_gamma) - log_m_from_rate(n, rate))
    return _normal_triple(density, n, float(ln_gamma), penalty)


def dt_bounds(density: DensityBuild, n: int, rate: float) -> FblPoint:
    """DT stack: saddlepoint sandwich G <= T <= S plus the normal triple."""
    threshold = dt_threshold(n, rate)
    solve = _solve_tilt(density, n, threshold)
    tm = dt_tilted_stats(density, solve.theta_star)
    comp = _components(tm, n, threshold)
    # multiplier (M-1)/2 equals exp(threshold)
    scaled_beta2 = _log_scaled(threshold, comp.beta2)
    beta = comp.beta1 + scaled_beta2
    g = max(0.0, comp.g1) + _log_scaled(threshold, max(0.0, comp.g2))
    s = min(1.0, beta + 2.0 * math.exp(comp.log_r1))
    flags = ("low_signal",) if comp.g1 < 0.0 else ()
    exact = None
    if density.channel.kind == "bsc":
        exact = bsc_exact_t(density.channel.delta, n, rate)
    return FblPoint(
        flavor="dt", n=n, rate=rate, log2_m=n * rate, threshold_log=threshold,
        gamma=None, theta=solve.theta_star, theta_residual=solve.residual,
        normal=dt_normal(density, n, rate),
        sp=SaddleTriple(g=g, beta=beta, s=s),
        components=comp, exact=exact, flags=flags,
    )


def mc_bounds(density: DensityBuild, n: int, rate: float,
              ln_gamma: float) -> FblPoint:
    """MC stack at a given gamma: G~ <= C <= S~ plus the normal triple.

    C may be negative away from the maximizing gamma; values are stored
    unclamped and the point flagged degenerate when gamma >= M.
    """
    ln_gamma = float(ln_gamma)
    log_m = log_m_from_rate(n, rate)
    solve = _solve_tilt(density, n, ln_gamma)
    tm = dt_tilted_stats(density, solve.theta_star)
    comp = _components(tm, n, ln_gamma)
    penalty = math.exp(ln_gamma - log_m)
    beta = comp.beta1 + _log_scaled(ln_gamma, comp.beta2) - penalty
    g = (max(0.0, comp.g1) + _log_scaled(ln_gamma, max(0.0, comp.g2))
         - penalty)
    s = min(1.0, comp.beta1 + _log_scaled(ln_gamma, comp.beta2)
            + 2.0 * math.exp(comp.log_r1) - penalty)
    flags = []
    if comp.g1 < 0.0:
        flags.append("low_signal")
    if ln_gamma >= log_m:
        flags.append("degenerate_gamma")
    exact = None
    if density.channel.kind == "bsc":
        exact = bsc_exact_c(density.channel.delta, n, rate, ln_gamma)
    return FblPoint(
        flavor="mc", n=n, rate=rate, log2_m=n * rate, threshold_log=ln_gamma,
        gamma=math.exp(ln_gamma) if ln_gamma < 700.0 else math.inf,
        theta=solve.theta_star, theta_residual=solve.residual,
        normal=mc_normal(density, n, rate, ln_gamma),
        sp=SaddleTriple(g=g, beta=beta, s=s),
        components=comp, exact=exact, flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# Exact BSC values by the flip-count reduction
# ---------------------------------------------------------------------------

def _bsc_flip_threshold(delta: float, n: int, threshold_log: float) -> int:
    """Smallest flip count k whose information-density sum is <= threshold.

    The sum is n ln(2(1-delta)) + k ln(delta/(1-delta)), strictly
    decreasing in k; ties at the threshold are included, with a small
    slack absorbing float rounding of an exactly-integer crossing.
    """
    c = ((n * math.log(2.0 * (1.0 - delta)) - threshold_log)
         / math.log((1.0 - delta) / delta))
    return max(0, min(n + 1, int(math.ceil(c - 1e-9))))


def _bsc_terms(delta: float, n: int, threshold_log: float):
    """(joint CDF term, log of the independent tail-complement term)."""
    k0 = _bsc_flip_threshold(delta, n, threshold_log)
    lp_joint = binomial_log_pmf(n, delta)
    lp_ind = binomial_log_pmf(n, 0.5)
    joint = float(np.exp(lp_joint[k0:]).sum()) if k0 <= n else 0.0
    log_ind = logsumexp(lp_ind[:k0]) if k0 >= 1 else -math.inf
    return joint, log_ind


def bsc_exact_t(delta: float, n: int, rate: float) -> float:
    """Exact DT bound value for the BSC.

    Conditioned on the flip count K ~ Binomial(n, delta) under the joint
    measure (Binomial(n, 1/2) under the independent one), the density sum
    is deterministic, so both expectations are binomial tails.
    """
    if not 0.0 < delta < 0.5:
        raise BadParams(f"bsc crossover must be in (0, 0.5), got {delta}")
    threshold = dt_threshold(n, rate)
    joint, log_ind = _bsc_terms(delta, n, threshold)
    return joint + math.exp(threshold + log_ind)


def bsc_exact_c(delta: float, n: int, rate: float, ln_gamma: float) -> float:
    """Exact MC bound value C(gamma) for the BSC at a given gamma."""
    if not 0.0 < delta < 0.5:
        raise BadParams(f"bsc crossover must be in (0, 0.5), got {delta}")
    ln_gamma = float(ln_gamma)
    joint, log_ind = _bsc_terms(delta, n, ln_gamma)
    return (joint + math.exp(ln_gamma + log_ind)
            - math.exp(ln_gamma - log_m_from_rate(n, rate)))


# ---------------------------------------------------------------------------
# Gamma optimization for the MC bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaSearch:
    """Result of the 1-D maximization of the MC objective over ln(gamma)."""

    ln_gamma: float
    point: FblPoint
    used_fallback: bool


def _mc_objective(density: DensityBuild, n: int, rate: float):
    """Exact C for the BSC, else the certified lower bound G~.

    Only a certified quantity may drive the search: maximizing the
    uncertified center could report a gamma whose G~ is not the best
    available true lower bound.
    """
    if density.channel.kind == "bsc":
        delta = density.channel.delta
        log_m = log_m_from_rate(n, rate)
        lp_joint = binomial_log_pmf(n, delta)
        lp_ind = binomial_log_pmf(n, 0.5)
        suffix_joint = np.concatenate([np.cumsum(np.exp(lp_joint)[::-1])[::-1], [0.0]])
        prefix_ind = np.logaddexp.accumulate(lp_ind)

        def objective(lg: float) -> float:
            k0 = _bsc_flip_threshold(delta, n, lg)
            log_ind = prefix_ind[k0 - 1] if k0 >= 1 else -math.inf
            return (float(suffix_joint[k0]) + math.exp(lg + log_ind)
                    - math.exp(lg - log_m))

        return objective

    def objective(lg: float) -> float:
        return mc_bounds(density, n, rate, lg).sp.g

    return objective


def _is_unimodal(values: np.ndarray, peak: int) -> bool:
    slack = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    rising = np.all(np.diff(values[: peak + 1]) >= -slack)
    falling = np.all(np.diff(values[peak:]) <= slack)
    return bool(rising and falling)


def mc_optimize_gamma(density: DensityBuild, n: int, rate: float) -> GammaSearch:
    """Maximize the MC objective over ln(gamma).

    A coarse scan over mean +- 6 standard deviations of the density sum
    (clipped to the support hull) locates the peak; golden-section then
    refines to 1e-6 in ln(gamma).  If the coarse scan is not unimodal the
    maximizer falls back to a 512-point grid argmax, recorded on the
    result.
    """
    dist = density.joint_density_dist
    tm = tilted_moments(dist, 0.0)
    spread = 6.0 * math.sqrt(n * tm.k2)
    span = dist.support_max - dist.support_min
    lo = max(n * tm.k1 - spread, n * (dist.support_min + 1e-4 * span))
    hi = min(n * tm.k1 + spread, n * (dist.support_max - 1e-4 * span))
    if not lo < hi:
        raise NoBracket(f"degenerate gamma bracket [{lo}, {hi}]")
    objective = _mc_objective(density, n, rate)

    grid = np.linspace(lo, hi, _GAMMA_GRID)
    values = np.array([objective(g) for g in grid])
    peak = int(np.argmax(values))
    used_fallback = False
    if not _is_unimodal(values, peak):
        grid = np.linspace(lo, hi, _GAMMA_FALLBACK_GRID)
        values = np.array([objective(g) for g in grid])
        peak = int(np.argmax(values))
        used_fallback = True
        best = float(grid[peak])
    else:
        a = float(grid[max(peak - 1, 0)])
        b = float(grid[min(peak + 1, grid.size - 1)])
        c = b - _INV_GOLDEN * (b - a)
        d = a + _INV_GOLDEN * (b - a)
        fc, fd = objective(c), objective(d)
        while b - a > _GAMMA_TOL:
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - _INV_GOLDEN * (b - a)
                fc = objective(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INV_GOLDEN * (b - a)
                fd = objective(d)
        best = 0.5 * (a + b)

    point = mc_bounds(density, n, rate, best)
    if used_fallback:
        point = replace(point, flags=point.flags + ("gamma_grid_fallback",))
    return GammaSearch(ln_gamma=best, point=point, used_fallback=used_fallback)
