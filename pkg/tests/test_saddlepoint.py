import math

import numpy as np
import pytest
import scipy.stats

from certbound import (
    OutOfHull,
    bernoulli,
    berry_esseen_envelope,
    chi_squared_quadrature,
    eta,
    exact_cdf,
    exponent_h,
    gaussian_quadrature,
    saddlepoint_cdf,
    saddlepoint_pdf,
    solve_theta_star,
    thm2_envelope,
    thm3_envelope,
    tilted_moments,
)

BERN = bernoulli(0.2)
GAUSS = gaussian_quadrature(nodes=257)

# frozen oracles (binomial by direct summation, cross-checked in test_oracle)
BINOM_CDF_30 = 0.9939406645189384
PHI_1 = 0.8413447460685429


class TestSolve:
    def test_at_the_mean_theta_is_zero(self):
        solve = solve_theta_star(BERN, 100, 20.0)
        assert solve.theta_star == 0.0
        assert solve.residual == 0.0

    def test_bernoulli_closed_form(self):
        # tilted mean p e^t / (1-p+p e^t) = 0.3 solved by hand
        solve = solve_theta_star(BERN, 100, 30.0)
        assert solve.theta_star == pytest.approx(math.log(12.0 / 7.0), abs=1e-9)
        assert abs(solve.residual) <= 1e-9 * 30.0

    def test_gaussian_closed_form(self):
        solve = solve_theta_star(GAUSS, 4, 2.0)
        assert solve.theta_star == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("a", [0.0, 100.0, -1.0, 350.0])
    def test_out_of_hull(self, a):
        with pytest.raises(OutOfHull):
            solve_theta_star(BERN, 100, a)

    def test_bisection_cross_check(self):
        # independent bisection on the tilted mean
        lo, hi = -20.0, 20.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if 100.0 * tilted_moments(BERN, mid).k1 < 30.0:
                lo = mid
            else:
                hi = mid
        assert solve_theta_star(BERN, 100, 30.0).theta_star == pytest.approx(
            0.5 * (lo + hi), abs=1e-8)


class TestEta:
    def test_zero_tilt_at_the_mean(self):
        assert eta(BERN, 0.0, 20.0, 100) == pytest.approx(0.5, abs=1e-15)

    def test_zero_tilt_is_gaussian_cdf(self):
        # mean 20, variance n K''(0) = 16
        assert eta(BERN, 0.0, 24.0, 100) == pytest.approx(PHI_1, abs=1e-12)

    def test_saddlepoint_identity_bit_exact(self):
        theta = solve_theta_star(BERN, 100, 30.0).theta_star
        assert eta(BERN, theta, 30.0, 100) == saddlepoint_cdf(BERN, 100, 30.0)

    def test_matches_normal_cdf_on_random_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = rng.uniform(0.1, 0.9)
            d = bernoulli(p)
            n = int(rng.integers(5, 200))
            a = rng.uniform(0.05, 0.95) * n
            tm = tilted_moments(d, 0.0)
            ref = scipy.stats.norm.cdf(a, loc=n * tm.k1,
                                       scale=math.sqrt(n * tm.k2))
            assert eta(d, 0.0, a, n) == pytest.approx(ref, abs=1e-12)


class TestSaddlepointCdf:
    def test_exact_for_gaussian(self):
        assert saddlepoint_cdf(GAUSS, 4, 2.0) == pytest.approx(PHI_1, abs=1e-9)

    def test_half_at_the_mean(self):
        assert saddlepoint_cdf(BERN, 100, 20.0) == pytest.approx(0.5, abs=1e-12)

    def test_within_certified_radius_of_binomial(self):
        env = thm3_envelope(BERN, 100, 30.0)
        assert env.lower <= BINOM_CDF_30 <= env.upper

    def test_monotonicity_diagnostic(self):
        # not asserted (not a guaranteed property); dips beyond 1e-12 are
        # counted and reported for monitoring
        grid = np.linspace(6.0, 34.0, 141)
        vals = [saddlepoint_cdf(BERN, 100, float(a)) for a in grid]
        dips = sum(1 for a, b in zip(vals, vals[1:]) if b < a - 1e-12)
        print(f"saddlepoint_cdf monotonicity dips: {dips}")


class TestSaddlepointPdf:
    def test_standard_normal_density_at_zero(self):
        got = saddlepoint_pdf(GAUSS, 1, 0.0)
        assert got == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-9)

    def test_correction_vanishes_for_gaussian(self):
        plain = saddlepoint_pdf(GAUSS, 1, 0.0)
        corrected = saddlepoint_pdf(GAUSS, 1, 0.0, with_correction=True)
        assert corrected == pytest.approx(plain, rel=1e-8)

    def test_chi_squared_sum_matches_gamma_shape(self):
        # exact up to normalization for gamma sums: 3% at the mode region
        d = chi_squared_quadrature(2001)
        ref = scipy.stats.gamma.pdf(50.0, a=25.0, scale=2.0)
        assert saddlepoint_pdf(d, 50, 50.0) == pytest.approx(ref, rel=0.03)


class TestThm2Envelope:
    def test_radius_at_zero_tilt(self):
        env = thm2_envelope(BERN, 0.0, 20.0, 100)
        xi0 = tilted_moments(BERN, 0.0).xi
        assert math.exp(env.log_radius) == pytest.approx(2.0 * xi0 / 10.0,
                                                         rel=1e-12)
        assert math.exp(env.log_radius) == pytest.approx(0.14193342, abs=1e-7)

    def test_tightens_past_the_mean(self):
        theta = solve_theta_star(BERN, 100, 30.0).theta_star
        env = thm2_envelope(BERN, theta, 30.0, 100)
        h = exponent_h(BERN, 100, 30.0)
        xi = tilted_moments(BERN, theta).xi
        assert env.log_radius == pytest.approx(h + math.log(2.0 * xi / 10.0),
                                               rel=1e-12)
        be = berry_esseen_envelope(BERN, 100, 30.0)
        assert math.exp(env.log_radius) < math.exp(be.log_radius)

    def test_contains_binomial_at_saddle_tilts(self):
        for a in range(5, 36):
            theta = solve_theta_star(BERN, 100, float(a)).theta_star
            env = thm2_envelope(BERN, theta, float(a), 100)
            exact = exact_cdf("binomial", a, n=100, p=0.2)
            assert env.lower <= exact <= env.upper
            assert env.upper - env.center >= 0.0

    def test_contains_oracles_at_arbitrary_tilts(self):
        # the tilted envelope certifies every tilt, not just the saddlepoint;
        # chi-squared tilts stay below 1/2 where its weight function lives
        for theta in (-1.5, -0.3, 0.0, 0.4, 1.1):
            for a in (12.0, 20.0, 27.0):
                env = thm2_envelope(BERN, theta, a, 100)
                exact = exact_cdf("binomial", a, n=100, p=0.2)
                assert env.lower <= exact <= env.upper
            for a in (-3.0, 0.0, 4.0):
                env = thm2_envelope(GAUSS, theta, a, 9)
                exact = exact_cdf("gaussian", a, mean=0.0, var=9.0)
                assert env.lower <= exact <= env.upper
        chi = chi_squared_quadrature(2001)
        for theta in (-1.5, -0.3, 0.0, 0.2):
            for a in (30.0, 50.0, 80.0):
                env = thm2_envelope(chi, theta, a, 50)
                exact = exact_cdf("gamma", a, shape=25.0, scale=2.0)
                assert env.lower <= exact <= env.upper


class TestThm3Envelope:
    def test_gaussian_center_exact(self):
        env = thm3_envelope(GAUSS, 9, 3.0)
        exact = exact_cdf("gaussian", 3.0, mean=0.0, var=9.0)
        assert abs(env.center - exact) <= 1e-9
        assert env.lower <= exact <= env.upper

    def test_chi_squared_containment(self):
        d = chi_squared_quadrature(2001)
        for a in range(10, 101, 5):
            env = thm3_envelope(d, 50, float(a))
            exact = exact_cdf("gamma", a, shape=25.0, scale=2.0)
            assert env.lower <= exact <= env.upper

    def test_equals_double_berry_radius_at_the_mean(self):
        sp = thm3_envelope(BERN, 100, 20.0)
        be = berry_esseen_envelope(BERN, 100, 20.0)
        assert math.exp(sp.log_radius) == pytest.approx(
            2.0 * math.exp(be.log_radius), rel=1e-12)


class TestRandomizedContainment:
    def test_envelopes_contain_convolution_oracle(self):
        # seeded random discrete laws; the exact sum CDF comes from the
        # convolution oracle, independent of the envelope machinery
        from certbound import convolve_sum
        from certbound.oracle import cdf_of
        from certbound.tilt_core import Distribution

        rng = np.random.default_rng(404)
        for _ in range(12):
            size = int(rng.integers(2, 6))
            values = np.sort(rng.uniform(-2.0, 2.0, size=size))
            probs = rng.dirichlet(np.ones(size))
            dist = Distribution.from_probs(values, probs)
            n = int(rng.integers(2, 9))
            total = convolve_sum(dist, n)
            lo = n * dist.support_min
            hi = n * dist.support_max
            for frac in (0.15, 0.5, 0.9):
                a = lo + frac * (hi - lo)
                exact = cdf_of(total, a)
                for env in (thm3_envelope(dist, n, a),
                            berry_esseen_envelope(dist, n, a),
                            thm2_envelope(dist, float(rng.uniform(-1.5, 1.5)),
                                          a, n)):
                    assert env.lower <= exact <= env.upper


class TestBerryEsseen:
    def test_radius_constant_in_a(self):
        envs = [berry_esseen_envelope(BERN, 100, a) for a in (8.0, 20.0, 31.0)]
        for env in envs:
            assert math.exp(env.log_radius) == pytest.approx(0.07096671,
                                                             abs=1e-7)

    def test_center_half_at_the_mean(self):
        assert berry_esseen_envelope(BERN, 100, 20.0).center == 0.5

    def test_contains_binomial(self):
        for a in range(5, 36):
            env = berry_esseen_envelope(BERN, 100, float(a))
            exact = exact_cdf("binomial", a, n=100, p=0.2)
            assert env.lower <= exact <= env.upper


class TestExponentH:
    def test_zero_at_the_mean(self):
        assert exponent_h(BERN, 100, 20.0) == 0.0

    def test_bernoulli_equals_minus_kl(self):
        # n K(theta*) - theta* a = -100 KL(0.3 || 0.2) for the binomial tilt
        kl = 0.3 * math.log(0.3 / 0.2) + 0.7 * math.log(0.7 / 0.8)
        got = exponent_h(BERN, 100, 30.0)
        assert got == pytest.approx(-100.0 * kl, abs=1e-9)
        assert got == pytest.approx(-2.8167557595, abs=1e-9)

    def test_nonpositive_and_concave(self):
        grid = np.arange(6.0, 35.0)
        hs = np.array([exponent_h(BERN, 100, float(a)) for a in grid])
        assert np.all(hs <= 0.0)
        second = np.diff(hs, 2)
        assert np.all(second <= 1e-8)
