"""Information-density distributions for binary-input memoryless channels.

For the symmetric channels here (BSC, binary-input AWGN, binary-input
symmetric alpha-stable noise) with uniform inputs and the output reference
law fixed to the channel marginal, the information density conditioned on
either input symbol has the same law, so a single finite-support
Distribution feeds both the achievability and converse stacks.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import roots_legendre

from .errors import BadChannel, QuadratureBudget, QuadratureFailure
from .tilt_core import Distribution, logsumexp

LN2 = math.log(2.0)

_GL_X, _GL_W = roots_legendre(24)
_MIN_NODES = 101
_AWGN_TRUNC = 1e-14       # marginal density threshold relative to its peak
_SAS_TRUNC = 1e-12        # heavy tails: truncate where f < 1e-12 * f(0)
_SAS_MASS_BUDGET = 2.5e-10  # cap on the tail mass omitted by truncation


@dataclass(frozen=True)
class ChannelModel:
    """Binary-input channel: "bsc", "bi_awgn", or "bi_sas".

    amplitude is the antipodal input level (inputs are {-a, +a}); for the
    BSC it is unused and the inputs are {0, 1}.
    """

    kind: str
    delta: float = 0.0
    snr: float = 0.0
    alpha: float = 0.0
    sigma: float = 0.0
    amplitude: float = 1.0


def bsc(delta: float) -> ChannelModel:
    if not 0.0 < delta < 0.5:
        raise BadChannel(f"bsc crossover must be in (0, 0.5), got {delta}")
    return ChannelModel(kind="bsc", delta=delta)


def bi_awgn(snr: float) -> ChannelModel:
    """Real AWGN with unit noise variance and inputs {-sqrt(snr), +sqrt(snr)}."""
    if snr <= 0.0:
        raise BadChannel(f"snr must be positive, got {snr}")
    return ChannelModel(kind="bi_awgn", snr=snr, amplitude=math.sqrt(snr))


def bi_sas(alpha: float, sigma: float, amplitude: float = 1.0) -> ChannelModel:
    if not 0.0 < alpha <= 2.0:
        raise BadChannel(f"stability exponent must be in (0, 2], got {alpha}")
    if sigma <= 0.0:
        raise BadChannel(f"dispersion must be positive, got {sigma}")
    if amplitude <= 0.0:
        raise BadChannel(f"amplitude must be positive, got {amplitude}")
    return ChannelModel(kind="bi_sas", alpha=alpha, sigma=sigma,
                        amplitude=amplitude)


@dataclass(frozen=True)
class DensityBuild:
    """Information-density Distribution plus its build parameters.

    raw_mass is the quadrature mass before normalization (1 exactly for
    the BSC); qy_kind records that the reference output law is the channel
    marginal, under which the conditional and unconditional densities
    coincide for these symmetric channels.
    """

    joint_density_dist: Distribution
    node_count: int
    truncation: float
    qy_kind: str
    channel: ChannelModel
    raw_mass: float


# ---------------------------------------------------------------------------
# Symmetric alpha-stable density
# ---------------------------------------------------------------------------

def _sas_series(alpha: float, sigma: float, z: float, max_terms: int = 60) -> float:
    """Power-tail series; adaptively truncated where it stops improving."""
    s = 0.0
    prev = math.inf
    for k in range(1, max_terms + 1):
        term = (gamma_fn(alpha * k + 1) / gamma_fn(k + 1)
                * math.sin(0.5 * k * math.pi * alpha)
                * sigma ** (alpha * k) * z ** (-alpha * k - 1.0))
        if abs(term) > prev:
            break
        s += term if k % 2 == 1 else -term
        if abs(term) <= 1e-17 * abs(s):
            break
        prev = abs(term)
    return s / math.pi


def _sas_quadrature(alpha: float, sigma: float, z: float) -> float:
    # half-period panels of cos(tz); the first is geometrically graded
    # toward 0 where (sigma t)^alpha has unbounded higher derivatives
    t_max = 48.0 ** (1.0 / alpha) / sigma
    if z * t_max <= math.pi:
        first = t_max
        rest = np.empty(0)
    else:
        half = math.pi / z
        first = half
        rest = half * np.arange(2, int(math.ceil(t_max / half)) + 1)
    graded = first * (1.0 / 3.0) ** np.arange(14, -1, -1)
    edges = np.concatenate([[0.0], graded, rest])
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    rad = 0.5 * (edges[1:] - edges[:-1])[:, None]
    t = mid + rad * _GL_X[None, :]
    vals = np.exp(-np.abs(sigma * t) ** alpha) * np.cos(t * z)
    return max(float((vals @ _GL_W) @ rad[:, 0]) / math.pi, 0.0)


def sas_density(alpha: float, sigma: float, z: float) -> float:
    """Density of the symmetric alpha-stable law with characteristic
    function exp(-|sigma t|^alpha), via cosine-transform quadrature.

    alpha = 2 is dispatched to the exact Gaussian form (variance
    2 sigma^2): there the oscillatory integral loses all relative accuracy
    in the far tail.  Beyond 50 sigma the power-tail series is used; it is
    accurate to machine precision in that range for alpha < 2.
    """
    if not 0.0 < alpha <= 2.0 or sigma <= 0.0:
        raise BadChannel(f"invalid stable parameters ({alpha}, {sigma})")
    z = abs(float(z))
    if alpha == 2.0:
        return math.exp(-z * z / (4.0 * sigma * sigma)) / (2.0 * sigma * math.sqrt(math.pi))
    f = _sas_quadrature(alpha, sigma, z) if z <= 50.0 * sigma else _sas_series(alpha, sigma, z)
    if not math.isfinite(f) or f < 0.0:
        raise QuadratureFailure(f"stable density failed at z={z}")
    return f


def _sas_tail_cutoff(alpha: float, sigma: float) -> float:
    """|z| beyond which the grid truncates.

    The density-threshold rule (f < _SAS_TRUNC * f(0)) alone leaves an
    omitted tail mass of order Y * f(Y), which for heavy tails exceeds the
    weight-sum budget; the cutoff is therefore extended until the leading
    power-tail mass 2 c1 Y^-alpha / alpha also drops below the budget.
    """
    f0 = sas_density(alpha, sigma, 0.0)
    if alpha == 2.0:
        return 2.0 * sigma * math.sqrt(-math.log(_SAS_TRUNC))
    c1 = gamma_fn(alpha + 1) * math.sin(0.5 * math.pi * alpha) * sigma**alpha / math.pi
    density_rule = (c1 / (_SAS_TRUNC * f0)) ** (1.0 / (1.0 + alpha))
    mass_rule = (2.0 * c1 / (alpha * _SAS_MASS_BUDGET)) ** (1.0 / alpha)
    return max(density_rule, mass_rule)


# ---------------------------------------------------------------------------
# Quadrature grids (composite Boole weights)
# ---------------------------------------------------------------------------

def _boole_count(n: int) -> int:
    # composite Boole rule needs a point count of 4k + 1
    return n + (-(n - 1)) % 4


def _boole_pattern(count: int) -> np.ndarray:
    """Composite Boole (4-panel Newton-Cotes) weights; O(h^6) accuracy."""
    pat = np.empty(count)
    pat[0::4] = 28.0
    pat[1::4] = 64.0
    pat[2::4] = 24.0
    pat[3::4] = 64.0
    pat[0] = pat[-1] = 14.0
    return pat / 45.0


def _uniform_grid(lo: float, hi: float, count: int):
    count = _boole_count(count)
    y = np.linspace(lo, hi, count)
    cell = (y[1] - y[0]) * _boole_pattern(count)
    return y, cell


def _log_tail_grid(lo: float, hi: float, count: int):
    """Log-spaced grid on [lo, hi] with Boole-in-log weights (positive lo)."""
    count = _boole_count(max(count, 5))
    u = np.linspace(math.log(lo), math.log(hi), count)
    y = np.exp(u)
    cell = (u[1] - u[0]) * _boole_pattern(count) * y
    return y, cell


def _awgn_grid(ch: ChannelModel, nodes: int):
    a = ch.amplitude
    half_width = a + math.sqrt(-2.0 * math.log(_AWGN_TRUNC))
    return *_uniform_grid(-half_width, half_width, nodes), half_width


def _sas_grid(ch: ChannelModel, nodes: int):
    a = ch.amplitude
    core = 10.0 * ch.sigma + a
    cutoff = _sas_tail_cutoff(ch.alpha, ch.sigma) + a
    if cutoff <= core:
        return *_uniform_grid(-cutoff, cutoff, nodes), cutoff
    n_core = nodes // 2 + 1
    n_tail = max((nodes - n_core) // 2, 5)
    yc, wc = _uniform_grid(-core, core, n_core)
    yt, wt = _log_tail_grid(core, cutoff, n_tail)
    y = np.concatenate([-yt[::-1], yc, yt])
    cell = np.concatenate([wt[::-1], wc, wt])
    return y, cell, cutoff


def _noise_log_density(ch: ChannelModel, z: np.ndarray) -> np.ndarray:
    if ch.kind == "bi_awgn":
        return -0.5 * z * z - 0.5 * math.log(2.0 * math.pi)
    dens = np.array([sas_density(ch.alpha, ch.sigma, abs(v)) for v in z])
    with np.errstate(divide="ignore"):
        return np.log(dens)


def _continuous_density(ch: ChannelModel, nodes: int, input_sign: int):
    if nodes < _MIN_NODES:
        raise QuadratureBudget(f"continuous channels need >= {_MIN_NODES} nodes")
    grid_fn = _awgn_grid if ch.kind == "bi_awgn" else _sas_grid
    y, cell, truncation = grid_fn(ch, nodes)
    a = ch.amplitude
    log_f_cond = _noise_log_density(ch, y - input_sign * a)
    log_f_other = _noise_log_density(ch, y + input_sign * a)
    # iota(x; y) = ln 2 - ln(1 + f(y+x)/f(y-x)), always <= ln 2
    iota = LN2 - np.log1p(np.exp(log_f_other - log_f_cond))
    log_w = log_f_cond + np.log(cell)
    return y, iota, log_w, truncation


def _build(ch: ChannelModel, nodes: int, input_sign: int) -> DensityBuild:
    if ch.kind == "bsc":
        d = ch.delta
        dist = Distribution(
            np.array([math.log(2.0 * d), math.log(2.0 * (1.0 - d))]),
            np.array([math.log(d), math.log1p(-d)]),
        )
        return DensityBuild(joint_density_dist=dist, node_count=2,
                            truncation=0.0, qy_kind="channel_marginal",
                            channel=ch, raw_mass=1.0)
    if ch.kind not in ("bi_awgn", "bi_sas"):
        raise BadChannel(f"unknown channel kind {ch.kind!r}")
    _, iota, log_w, truncation = _continuous_density(ch, nodes, input_sign)
    raw_mass = math.exp(logsumexp(log_w))
    if np.max(iota) > LN2 + 1e-12:
        raise QuadratureFailure("information density exceeded ln 2")
    dist = Distribution(
        iota, log_w, kind="quadrature",
        source=f"{ch.kind}(nodes={nodes},truncation={truncation:.6g})")
    return DensityBuild(joint_density_dist=dist, node_count=nodes,
                        truncation=truncation, qy_kind="channel_marginal",
                        channel=ch, raw_mass=raw_mass)


@functools.lru_cache(maxsize=32)
def _build_cached(ch: ChannelModel, nodes: int, input_sign: int) -> DensityBuild:
    return _build(ch, nodes, input_sign)


def build_density_dist(ch: ChannelModel, nodes: int = 2001,
                       input_sign: int = 1) -> DensityBuild:
    """Law of the single-letter information density under the joint measure
    (uniform input times channel), conditioned on one input symbol.

    By the channel symmetry the conditional law does not depend on the
    symbol; `input_sign` selects which one is used and exists so the
    symmetry can be checked explicitly.
    """
    if input_sign not in (1, -1):
        raise BadChannel("input_sign must be +1 or -1")
    return _build_cached(ch, int(nodes), int(input_sign))


def build_independent_density_dist(ch: ChannelModel,
                                   nodes: int = 2001) -> Distribution:
    """Law of the information density under the independent measure
    (input drawn fresh, output from the channel marginal).

    Built directly from the marginal weights rather than by reweighting
    the joint law, so change-of-measure identities can be verified against
    an independent construction.
    """
    if ch.kind == "bsc":
        d = ch.delta
        return Distribution(
            np.array([math.log(2.0 * d), math.log(2.0 * (1.0 - d))]),
            np.array([-LN2, -LN2]),
        )
    _, iota, log_w_joint, _ = _continuous_density(ch, nodes, 1)
    _, _, log_w_flip, _ = _continuous_density(ch, nodes, -1)
    # marginal weight (f(y-a) + f(y+a))/2 on the same iota values
    log_w = np.logaddexp(log_w_joint, log_w_flip) - LN2
    return Distribution(iota, log_w, kind="quadrature",
                        source=f"{ch.kind}_independent(nodes={nodes})")
