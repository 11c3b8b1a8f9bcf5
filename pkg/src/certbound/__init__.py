"""certbound: certified saddlepoint and normal-approximation CDF envelopes
for sums of i.i.d. random variables, applied to the dependence-testing and
meta-converse finite-blocklength channel-coding bounds."""

from .channels import (
    ChannelModel,
    DensityBuild,
    bi_awgn,
    bi_sas,
    bsc,
    build_density_dist,
    build_independent_density_dist,
    sas_density,
)
from .errors import (
    BadChannel,
    BadParams,
    CertboundError,
    ConfigError,
    DegenerateVariance,
    NoBracket,
    NoConvergence,
    OutOfHull,
    QuadratureBudget,
    QuadratureFailure,
    TiltOverflow,
    TooLarge,
)
from .fbl_bounds import (
    FblPoint,
    GammaSearch,
    bsc_exact_c,
    bsc_exact_t,
    dt_bounds,
    dt_normal,
    dt_solve_theta,
    dt_tilted_stats,
    mc_bounds,
    mc_normal,
    mc_optimize_gamma,
    mc_solve_theta,
    mc_tilted_stats,
)
from .oracle import McEstimate, convolve_sum, exact_cdf, mc_cdf, mc_fbl
from .saddlepoint import (
    BoundEnvelope,
    SaddlepointSolve,
    berry_esseen_envelope,
    eta,
    exponent_h,
    saddlepoint_cdf,
    saddlepoint_pdf,
    solve_theta_star,
    thm2_envelope,
    thm3_envelope,
)
from .tilt_core import (
    Distribution,
    TiltedMoments,
    bernoulli,
    chi_squared_quadrature,
    erfcx,
    gaussian_q,
    gaussian_quadrature,
    log_exp_times_q,
    log_gaussian_q,
    tilt_distribution,
    tilted_moments,
)

__version__ = "0.1.0"
