import numpy as np
import pytest
from scipy.stats import norm

from parachain import (
    DomainError,
    GibbsParams,
    RngState,
    RwmParams,
    gibbs_run,
    gibbs_start_points,
    gibbs_true_gamma,
    gibbs_true_sigma,
    rosenbrock_logpdf,
    rosenbrock_start_points,
    rwm_run,
)
from parachain.samplers import gibbs_conditional_x1, gibbs_conditional_x2


def lag_autocorr(x, k):
    dev = x - x.mean()
    return (dev[:-k] * dev[k:]).sum() / (dev**2).sum()


class TestGibbsParams:
    def test_rejects_nonstationary_correlation(self):
        with pytest.raises(DomainError):
            GibbsParams(omega1=1.0, omega2=1.0, rho=1.0)

    def test_rejects_bad_scales(self):
        with pytest.raises(DomainError):
            GibbsParams(omega1=-1.0)

    def test_conditional_hand_example(self):
        mean, var = gibbs_conditional_x1(GibbsParams(rho=0.5), x2=2.0)
        assert (mean, var) == (1.0, 0.75)

    def test_conditionals_are_symmetric_in_roles(self):
        params = GibbsParams(mu1=1.0, mu2=-2.0, omega1=4.0, omega2=9.0, rho=1.5)
        mean, var = gibbs_conditional_x2(params, x1=3.0)
        assert mean == pytest.approx(-2.0 + 1.5 / 4.0 * 2.0)
        assert var == pytest.approx(9.0 - 1.5**2 / 4.0)


class TestGibbsRun:
    def test_reproducible(self):
        params = GibbsParams(rho=0.7)
        a = gibbs_run(params, 500, (3.0, -3.0), RngState(1, 2))
        b = gibbs_run(params, 500, (3.0, -3.0), RngState(1, 2))
        np.testing.assert_array_equal(a, b)

    def test_independent_case_is_iid(self):
        chain = gibbs_run(GibbsParams(rho=0.0), 100_000, (0.0, 0.0), RngState(3, 0))
        assert abs(lag_autocorr(chain[:, 0], 1)) <= 0.01
        assert abs(lag_autocorr(chain[:, 1], 1)) <= 0.01

    def test_lag_one_autocorrelation_matches_ar_coefficient(self):
        chain = gibbs_run(GibbsParams(rho=0.5), 100_000, (0.0, 0.0), RngState(4, 0))
        assert abs(lag_autocorr(chain[:, 0], 1) - 0.25) <= 0.01

    def test_autocorrelation_decays_geometrically(self):
        params = GibbsParams(rho=0.6)
        phi = params.ar_coefficient
        chain = gibbs_run(params, 100_000, (0.0, 0.0), RngState(5, 0))
        for k in range(1, 6):
            assert abs(lag_autocorr(chain[:, 0], k) - phi**k) <= 0.012

    def test_stationary_marginal_moments(self):
        params = GibbsParams(rho=0.5)
        n = 100_000
        chain = gibbs_run(params, n, (0.0, 0.0), RngState(6, 0))
        band = 4.0 * np.sqrt(gibbs_true_sigma(params)[0, 0] / n)
        assert abs(chain[:, 0].mean()) <= band
        assert abs(chain[:, 0].var(ddof=1) - params.omega1) <= 0.03

    def test_respects_general_parameters(self):
        params = GibbsParams(mu1=2.0, mu2=-1.0, omega1=4.0, omega2=0.25, rho=0.3)
        n = 200_000
        chain = gibbs_run(params, n, (2.0, -1.0), RngState(7, 0))
        assert chain[:, 0].mean() == pytest.approx(2.0, abs=0.05)
        assert chain[:, 1].mean() == pytest.approx(-1.0, abs=0.02)
        assert chain[:, 0].var(ddof=1) == pytest.approx(4.0, rel=0.05)
        assert chain[:, 1].var(ddof=1) == pytest.approx(0.25, rel=0.05)
        got_corr = np.corrcoef(chain[:, 0], chain[:, 1])[0, 1]
        assert got_corr == pytest.approx(0.3, abs=0.02)

    def test_input_validation(self):
        with pytest.raises(DomainError):
            gibbs_run(GibbsParams(), 0, (0.0, 0.0), RngState(1))
        with pytest.raises(DomainError):
            gibbs_run(GibbsParams(), 5, (0.0, 0.0, 0.0), RngState(1))


class TestGibbsTruth:
    def test_sigma_independent_case(self):
        np.testing.assert_allclose(gibbs_true_sigma(GibbsParams(rho=0.0)), np.eye(2))

    def test_sigma_half_correlation(self):
        got = gibbs_true_sigma(GibbsParams(rho=0.5))
        np.testing.assert_allclose(got, [[5.0 / 3.0, 4.0 / 3.0], [4.0 / 3.0, 5.0 / 3.0]])

    def test_sigma_near_unit_correlation(self):
        got = gibbs_true_sigma(GibbsParams(rho=0.999))
        assert got[0, 0] == pytest.approx(999.5003, abs=1e-3)
        assert got[0, 1] == pytest.approx(999.4998, abs=1e-3)

    def test_sigma_dominates_stationary_variance(self):
        for rho in (0.0, 0.1, 0.5, 0.9, 0.999):
            sig = gibbs_true_sigma(GibbsParams(rho=rho))
            if rho == 0.0:
                assert sig[0, 0] == pytest.approx(1.0)
            else:
                assert sig[0, 0] > 1.0

    def test_gamma_independent_case(self):
        np.testing.assert_allclose(gibbs_true_gamma(GibbsParams(rho=0.0)), np.zeros((2, 2)))

    def test_gamma_half_correlation(self):
        got = gibbs_true_gamma(GibbsParams(rho=0.5))
        np.testing.assert_allclose(
            got, [[-8.0 / 9.0, -10.0 / 9.0], [-10.0 / 9.0, -8.0 / 9.0]], rtol=1e-14
        )

    @pytest.mark.parametrize(
        "params",
        [
            GibbsParams(rho=0.5),
            GibbsParams(omega1=2.0, omega2=0.5, rho=0.4),
            GibbsParams(mu1=3.0, mu2=-1.0, omega1=1.5, omega2=2.5, rho=-0.8),
        ],
    )
    def test_gamma_matches_truncated_series(self, params):
        # brute-force oracle: -sum_{s<=1000} s (C_s + C_s^T) from the
        # geometric lag covariances of the scan
        w1, w2, rho = params.omega1, params.omega2, params.rho
        phi = params.ar_coefficient
        total = np.zeros((2, 2))
        for s in range(1, 1001):
            cov_s = np.array(
                [[w1 * phi**s, rho * phi**s], [rho * phi ** (s - 1), w2 * phi**s]]
            )
            total -= s * (cov_s + cov_s.T)
        got = gibbs_true_gamma(params)
        assert np.abs(got - total).max() <= 1e-10


class TestStartPoints:
    def test_gibbs_circle(self):
        params = GibbsParams(mu1=1.0, mu2=2.0, omega1=4.0, omega2=1.0)
        pts = gibbs_start_points(params, 8)
        radii = np.hypot(pts[:, 0] - 1.0, pts[:, 1] - 2.0)
        np.testing.assert_allclose(radii, 20.0)
        assert len({tuple(p) for p in np.round(pts, 12)}) == 8

    def test_rosenbrock_ridge(self):
        pts = rosenbrock_start_points(5)
        np.testing.assert_allclose(pts[:, 0], [-4.0, -1.5, 1.0, 3.5, 6.0])
        np.testing.assert_allclose(pts[:, 1], pts[:, 0] ** 2)

    def test_single_chain_starts_at_center(self):
        np.testing.assert_allclose(rosenbrock_start_points(1), [[1.0, 1.0]])


class TestRosenbrockDensity:
    @pytest.mark.parametrize(
        "x,expected", [((1.0, 1.0), 0.0), ((1.0, 0.0), -5.0), ((0.0, 0.0), -0.05)]
    )
    def test_values(self, x, expected):
        assert rosenbrock_logpdf(x) == pytest.approx(expected, abs=1e-15)


class TestRwm:
    def test_flat_target_accepts_everything(self):
        result = rwm_run(RwmParams(lambda x: 0.0, 1.0, [0.0]), 500, RngState(8, 0))
        assert result.acceptance_rate == 1.0

    def test_reproducible(self):
        params = RwmParams(rosenbrock_logpdf, 0.35, [1.0, 1.0])
        a = rwm_run(params, 300, RngState(9, 4))
        b = rwm_run(params, 300, RngState(9, 4))
        np.testing.assert_array_equal(a.chain, b.chain)
        assert a.acceptance_rate == b.acceptance_rate

    def test_classical_acceptance_band_on_standard_normal(self):
        target = lambda x: -0.5 * float(x @ x)
        result = rwm_run(RwmParams(target, 2.4, [0.0]), 100_000, RngState(10, 0))
        assert 0.35 < result.acceptance_rate < 0.55

    def test_vanishing_proposal_accepts_almost_everything(self):
        target = lambda x: -0.5 * float(x @ x)
        result = rwm_run(RwmParams(target, 1e-8, [0.0]), 20_000, RngState(11, 0))
        assert result.acceptance_rate > 0.999

    def test_long_run_histogram_matches_standard_normal(self):
        target = lambda x: -0.5 * float(x @ x)
        result = rwm_run(RwmParams(target, 2.4, [0.0]), 1_000_000, RngState(12, 0))
        edges = np.arange(-4.0, 4.25, 0.25)
        hist, _ = np.histogram(result.chain[:, 0], bins=edges, density=True)
        mids = 0.5 * (edges[:-1] + edges[1:])
        assert np.abs(hist - norm.pdf(mids)).max() <= 0.02

    def test_rejects_bad_start(self):
        with pytest.raises(DomainError):
            rwm_run(RwmParams(lambda x: float("-inf"), 1.0, [0.0]), 10, RngState(13, 0))

    def test_rejects_bad_scale(self):
        with pytest.raises(DomainError):
            RwmParams(lambda x: 0.0, 0.0, [0.0])
