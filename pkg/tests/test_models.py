import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from conftest import within_se
from damcmc.adda import check_block_locality
from damcmc.core import run_chain, trivial_group
from damcmc.diagnostics import batch_means_se
from damcmc.errors import InvalidParameterError, NotSPDError, SandwichStepError
from damcmc.models import (
    ElasticNetModel,
    LassoModel,
    LogisticModel,
    ProbitGlmmModel,
    QuantRegModel,
    RobitModel,
    elastic_net_da_step,
    lasso_da_step,
    pg_logistic_da_step,
    probit_glmm_da_step,
    probit_haar_pxda_step,
    quantile_tau2,
    quantile_theta,
    quantreg_two_block_pxda_step,
    quantreg_two_block_step,
    robit_da_step,
)
from damcmc.rng import make_rng
from oracles import asymmetric_laplace_logpdf, chi_square_pvalue, probit_effect_moments

LASSO_W = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0]])
LASSO_Z = np.array([-1.1, 0.3, 0.2, 1.4, 1.5])
QR_W = np.array([[1.0], [2.0], [-1.0], [0.5]])
QR_Z = np.array([0.8, 2.5, -0.4, 0.1])
P_MIN = 1e-3


def agree(a, b, k=3.0):
    """Batch-means means of two traces within ``k`` combined SE."""
    ba, bb = batch_means_se(a), batch_means_se(b)
    return abs(ba.mean - bb.mean) <= k * np.hypot(ba.se, bb.se)


def dispersed_agreement(step, starts, n, seed, functional):
    traces = [run_chain(step, x0, n, make_rng(seed, c), burn_in=500).draws for c, x0 in enumerate(starts)]
    return agree(functional(traces[0]), functional(traces[1]))


class TestLasso:
    def test_conditional_mean_of_beta(self, rng):
        model = LassoModel([[1.0], [-1.0]], [1.0, -1.0], lam=1.0, alpha=3.0, xi=1.0)
        draws = np.array([model.draw_parameters(np.array([1.0]), rng) for _ in range(20_000)])
        assert within_se(draws[:, 0], 2.0 / 3.0)

    def test_sigma2_conditional_is_inverse_gamma(self, rng):
        model = LassoModel(LASSO_W, LASSO_Z, lam=1.0, alpha=1.5, xi=0.7)
        assert model.sigma2_shape == (5 - 1) / 2 + 1.5
        y = np.array([0.8])
        w, zt = model.W, model.z_tilde
        a_inv = np.linalg.inv(w.T @ w + np.diag(1 / y))
        rate = zt @ (np.eye(5) - w @ a_inv @ w.T) @ zt / 2 + 0.7
        draws = np.array([model.draw_parameters(y, rng)[1] for _ in range(20_000)])
        pvalue = stats.kstest(draws, stats.invgamma(model.sigma2_shape, scale=rate).cdf).pvalue
        assert pvalue > P_MIN

    def test_elastic_net_with_zero_ridge_reproduces_lasso(self):
        lasso = LassoModel(LASSO_W, LASSO_Z, lam=0.8)
        enet = ElasticNetModel(LASSO_W, LASSO_Z, lam1=0.8, lam2=0.0)
        x0 = lasso.initial_state()
        a = run_chain(lambda x, r: lasso_da_step(lasso, x, r), x0, 300, make_rng(5)).draws
        b = run_chain(lambda x, r: elastic_net_da_step(enet, x, r), x0, 300, make_rng(5)).draws
        np.testing.assert_array_equal(a, b)

    @given(y=st.lists(st.floats(1e-8, 1e8), min_size=1, max_size=6), lam2=st.floats(1e-6, 1e6))
    @settings(max_examples=60, deadline=None)
    def test_ridge_scales_bounded(self, y, lam2):
        model = ElasticNetModel(np.tile(LASSO_W, (1, len(y))), LASSO_Z, lam1=1.0, lam2=lam2)
        d = 1.0 / model.ridge_diagonal(np.array(y))
        assert np.all(d > 0) and np.all(d < 1.0 / lam2)

    def test_zero_coefficient_scale_draw(self, rng):
        model = LassoModel(LASSO_W, LASSO_Z, lam=2.0)
        draws = np.array([model.draw_latent(np.array([0.0, 1.0]), rng)[0] for _ in range(20_000)])
        assert np.all(np.isfinite(draws)) and np.all(draws > 0)
        assert stats.kstest(draws, stats.gamma(0.5, scale=2.0 / 4.0).cdf).pvalue > P_MIN

    def test_scale_conditional_matches_mixture(self, rng):
        # f(y | beta, sigma2) from N(beta; 0, sigma2 y) Exp(y; rate lam^2/2)
        model = LassoModel(LASSO_W, LASSO_Z, lam=1.3)
        beta, sigma2 = 0.6, 0.9
        draws = np.array([model.draw_latent(np.array([beta, sigma2]), rng)[0] for _ in range(20_000)])

        def logd(y):
            return -0.5 * np.log(y) - beta ** 2 / (2 * sigma2 * y) - 1.3 ** 2 * y / 2

        edges = np.quantile(draws, np.linspace(0.05, 0.95, 19))
        assert chi_square_pvalue(draws, logd, edges, support=(0, np.inf)) > P_MIN

    def test_design_must_be_centered(self):
        with pytest.raises(InvalidParameterError, match="centered"):
            LassoModel(LASSO_W + 1.0, LASSO_Z, lam=1.0)
        model = LassoModel(LASSO_W + 1.0, LASSO_Z, lam=1.0, standardize=True)
        np.testing.assert_allclose(model.W, LASSO_W)

    @pytest.mark.parametrize("lam2", [0.0, 0.7])
    def test_conditional_mode_is_penalized_estimate(self, lam2):
        w = LASSO_W[:, 0]
        zt = LASSO_Z - LASSO_Z.mean()
        lam1, sigma = 1.5, 0.8
        grid = np.linspace(-2, 2, 400_001)
        # Laplace prior written as the normal scale mixture, integrated numerically
        if lam2 == 0:
            def log_prior(b):
                mix = integrate.quad(lambda y: stats.norm.pdf(b, 0, sigma * np.sqrt(y))
                                     * stats.expon.pdf(y, scale=2 / lam1 ** 2), 0, np.inf)[0]
                return np.log(mix)

            coarse = np.linspace(-2, 2, 801)
            prior = np.interp(grid, coarse, [log_prior(b) for b in coarse])
        else:
            prior = -lam2 * grid ** 2 / (2 * sigma ** 2) - lam1 * np.abs(grid) / sigma
        rss = zt @ zt - 2 * grid * (w @ zt) + grid ** 2 * (w @ w)
        log_post = -rss / (2 * sigma ** 2) + prior
        mode = grid[np.argmax(log_post)]

        def objective(b):
            return np.sum((zt - w * b) ** 2) + lam2 * b * b + 2 * sigma * lam1 * abs(b)

        fit = optimize.minimize_scalar(objective, bounds=(-2, 2), method="bounded",
                                       options={"xatol": 1e-10})
        assert abs(mode - fit.x) <= 5e-3

    def test_dispersed_starts(self):
        model = ElasticNetModel(LASSO_W, LASSO_Z, lam1=1.0, lam2=0.5)
        assert dispersed_agreement(lambda x, r: elastic_net_da_step(model, x, r),
                                   [[-3.0, 0.1], [3.0, 20.0]], 20_000, 31, lambda d: d[:, 0])

    def test_blocked_model_has_no_data_reads(self):
        w = np.random.default_rng(0).standard_normal((6, 5))
        blocked = LassoModel(w - w.mean(0), np.arange(6.0), lam=1.0).blocked_model(2)
        assert blocked.block_items == (3, 2) and blocked.admissible
        assert all(s == () for s in blocked.data_subsets)


class TestLogistic:
    def test_kappa(self):
        model = LogisticModel([[1.0], [2.0]], [1, 0], trials=[1, 1])
        np.testing.assert_array_equal(model.kappa, [0.5, -0.5])

    def test_null_design_gives_prior_draws(self, rng):
        model = LogisticModel(np.zeros((4, 2)), [1, 0, 1, 1])
        draws = np.array([pg_logistic_da_step(model, np.array([5.0, -5.0]), rng) for _ in range(20_000)])
        for j in range(2):
            assert stats.kstest(draws[:, j], "norm").pvalue > P_MIN
        assert abs(np.corrcoef(draws.T)[0, 1]) < 4 / np.sqrt(20_000)

    def test_flat_prior_needs_assertion(self, rng):
        with pytest.raises(InvalidParameterError, match="assume_proper"):
            LogisticModel([[1.0]], [1], prior_precision=[[0.0]])
        model = LogisticModel(np.zeros((2, 1)), [1, 0], prior_precision=[[0.0]], assume_proper=True)
        with pytest.raises(NotSPDError, match="propriety"):
            pg_logistic_da_step(model, np.zeros(1), rng)

    def test_rejects_bad_counts(self):
        with pytest.raises(InvalidParameterError):
            LogisticModel([[1.0]], [3], trials=[2])

    def test_dispersed_starts(self):
        model = LogisticModel([[1.0], [-0.5], [2.0]], [1, 0, 1])
        assert dispersed_agreement(lambda b, r: pg_logistic_da_step(model, b, r),
                                   [[-6.0], [6.0]], 20_000, 32, lambda d: d[:, 0])


def probit_instance(beta=0.3, z=(1, 0)):
    return ProbitGlmmModel([[1.0], [1.0]], [[1.0], [-0.7]], [beta], [([[2.0]], [[1.0]])], list(z))


class TestProbit:
    def test_null_random_design(self, rng):
        model = ProbitGlmmModel(np.ones((3, 1)), np.zeros((3, 2)), [0.4], [([[2.0, 0.5], [0.5, 1.0]], [[1.0]])],
                                [1, 0, 1])
        draws = np.array([probit_glmm_da_step(model, np.array([9.0, -9.0]), rng) for _ in range(20_000)])
        np.testing.assert_allclose(np.cov(draws.T), [[2.0, 0.5], [0.5, 1.0]], atol=0.08)
        assert all(within_se(draws[:, j], 0.0) for j in range(2))

    @given(z=st.lists(st.integers(0, 1), min_size=1, max_size=8), seed=st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_truncation_signs(self, z, seed):
        m = len(z)
        gen = np.random.default_rng(seed)
        model = ProbitGlmmModel(gen.standard_normal((m, 1)), gen.standard_normal((m, 1)), [1.0],
                                [([[1.0]], [[1.0]])], z)
        y = model.draw_latent(gen.standard_normal(1) * 5, gen)
        assert np.array_equal(y > 0, np.asarray(z) == 1)

    def test_scale_draw_is_chi_distributed(self, rng):
        gen = np.random.default_rng(7)
        model = ProbitGlmmModel(np.ones((5, 1)), gen.standard_normal((5, 2)), [0.0], [([[1.0]], np.eye(2))],
                                [1, 0, 0, 1, 1])
        y = model.draw_latent(np.zeros(2), rng)
        s = y @ model.V1 @ y
        draws = np.array([model.draw_scale(y, rng) for _ in range(20_000)]) ** 2 * s
        assert within_se(draws, 5.0)
        assert stats.kstest(draws, stats.chi2(5).cdf).pvalue > P_MIN

    def test_scale_step_needs_positive_form(self, rng):
        model = probit_instance()
        with pytest.raises(SandwichStepError):
            model.draw_scale(np.zeros(2), rng)

    def test_v1_positive_semidefinite(self):
        gen = np.random.default_rng(3)
        model = ProbitGlmmModel(np.ones((8, 1)), gen.standard_normal((8, 3)), [0.2],
                                [([[1.5]], np.eye(3))], gen.integers(0, 2, 8))
        assert np.linalg.eigvalsh(model.V1).min() >= -1e-10

    def test_pxda_and_da_share_the_posterior(self):
        model = probit_instance(beta=0.0)
        exact = probit_effect_moments(np.zeros(2), np.array([1.0, -0.7]), [1, 0], 2.0)
        for step in (probit_glmm_da_step, probit_haar_pxda_step):
            trace = run_chain(lambda u, r: step(model, u, r), [0.0], 40_000, make_rng(8), burn_in=500)
            u = trace.draws[:, 0]
            for power in (1, 2):
                bm = batch_means_se(u ** power)
                assert abs(bm.mean - exact[power]) <= 3 * bm.se, (step.__name__, power)

    def test_blocked_model_is_local(self):
        w, v = np.ones((6, 1)), np.linspace(-1, 1, 6)[:, None]

        def build(z):
            return ProbitGlmmModel(w, v, [0.1], [([[1.0]], [[1.0]])], z).blocked_model(3)

        def flip(z, idx):
            out = np.array(z)
            out[idx] = 1 - out[idx]
            return out

        assert check_block_locality(build, np.array([1, 0, 1, 1, 0, 0]), flip, np.array([0.4]), seed=11)
        assert build(np.zeros(6, int)).data_subsets == ((0, 1), (2, 3), (4, 5))

    def test_dispersed_starts(self):
        model = probit_instance()
        assert dispersed_agreement(lambda u, r: probit_haar_pxda_step(model, u, r),
                                   [[-8.0], [8.0]], 20_000, 33, lambda d: d[:, 0])


ROBIT_W = np.array([1.0, -1.5])


class TestRobit:
    def setup_method(self):
        self.model = RobitModel(ROBIT_W[:, None], [1, 1], nu=4.0)

    @given(seed=st.integers(0, 2 ** 32 - 1), beta=st.floats(-10, 10))
    @settings(max_examples=50, deadline=None)
    def test_latent_precisions_positive(self, seed, beta):
        latent = self.model.draw_latent(np.array([beta]), np.random.default_rng(seed))
        assert np.all(latent[2:] > 0) and np.all(latent[:2] > 0)

    def test_truncated_t_latent(self, rng):
        beta = 0.4
        loc = ROBIT_W[0] * beta
        draws = np.array([self.model.draw_latent(np.array([beta]), rng)[0] for _ in range(20_000)])

        def logd(u):
            return stats.t.logpdf(u, 4.0, loc=loc)

        edges = np.quantile(draws, np.linspace(0.05, 0.95, 19))
        assert chi_square_pvalue(draws, logd, edges, support=(0, np.inf)) > P_MIN

    def test_precision_pivot(self, rng):
        beta = -0.3
        loc = ROBIT_W * beta
        latent = np.array([self.model.draw_latent(np.array([beta]), rng) for _ in range(20_000)])
        u, lam = latent[:, :2], latent[:, 2:]
        pivot = lam * (4.0 + (u - loc) ** 2) / 2
        for i in range(2):
            assert stats.kstest(pivot[:, i], stats.gamma(2.5).cdf).pvalue > P_MIN

    def test_beta_given_latent(self, rng):
        u, lam = np.array([0.7, 0.2]), np.array([0.5, 1.8])
        latent = np.concatenate([u, lam])
        draws = np.array([self.model.draw_beta(latent, rng)[0] for _ in range(20_000)])

        def logd(b):
            return -b * b / 2 - np.sum(lam * (u - ROBIT_W * b) ** 2) / 2

        edges = np.quantile(draws, np.linspace(0.05, 0.95, 19))
        assert chi_square_pvalue(draws, logd, edges) > P_MIN

    def test_heavy_dof_matches_probit_chain(self):
        w = np.array([[1.0], [-1.5], [0.6]])
        z = [1, 0, 0]
        robit = RobitModel(w, z, nu=1e4)
        probit = ProbitGlmmModel(np.zeros((3, 1)), w, [0.0], [([[1.0]], [[1.0]])], z)
        a = run_chain(lambda b, r: robit_da_step(robit, b, r), [0.0], 30_000, make_rng(41), burn_in=500)
        b = run_chain(lambda u, r: probit_glmm_da_step(probit, u, r), [0.0], 30_000, make_rng(42), burn_in=500)
        assert agree(a.draws[:, 0], b.draws[:, 0])

    def test_dispersed_starts(self):
        assert dispersed_agreement(lambda b, r: robit_da_step(self.model, b, r),
                                   [[-5.0], [5.0]], 20_000, 34, lambda d: d[:, 0])


class TestQuantReg:
    def setup_method(self):
        self.model = QuantRegModel(QR_W, QR_Z, alpha=0.3, b0=[[10.0]], n0=4.0, t0=4.0)

    def test_median_constants(self):
        assert quantile_theta(0.5) == 0.0
        assert quantile_tau2(0.5) == 8.0

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            QuantRegModel(QR_W, QR_Z, alpha=1.0)
        with pytest.raises(InvalidParameterError):
            QuantRegModel(QR_W, QR_Z, alpha=0.3, t0=0.0)

    def test_asymmetric_laplace_quantile(self):
        mass = integrate.quad(lambda e: np.exp(asymmetric_laplace_logpdf(e, 0.3)), -np.inf, 0)[0]
        assert abs(mass - 0.3) < 1e-8

    def test_mixture_identity(self, rng):
        alpha, beta, sigma, w, z = 0.3, 0.4, 1.7, 1.2, 0.1
        theta, tau2 = quantile_theta(alpha), quantile_tau2(alpha)
        r = rng.exponential(sigma, 400_000)
        values = stats.norm.pdf(z, w * beta + theta * r, np.sqrt(r * sigma * tau2))
        target = np.exp(asymmetric_laplace_logpdf((z - w * beta) / sigma, alpha)) / sigma
        assert within_se(values, target)

    def _log_joint(self, beta, r, sigma):
        m = self.model
        mean = QR_W[:, 0] * beta + m.theta * r
        return (stats.norm.logpdf(beta, 0.0, np.sqrt(10.0)) + stats.invgamma.logpdf(sigma, 2.0, scale=2.0)
                + np.sum(stats.norm.logpdf(QR_Z, mean, np.sqrt(r * sigma * m.tau2)))
                + np.sum(stats.expon.logpdf(r, scale=sigma)))

    def _check(self, draws, logd, support=(-np.inf, np.inf)):
        edges = np.quantile(draws, np.linspace(0.05, 0.95, 19))
        return chi_square_pvalue(draws, logd, edges, support=support)

    def test_scale_conditional(self, rng):
        beta, r = 0.9, np.array([0.5, 1.2, 0.3, 2.0])
        draws = np.array([self.model.draw_sigma(np.array([beta]), r, rng) for _ in range(20_000)])
        assert self._check(draws, lambda s: self._log_joint(beta, r, s), (0, np.inf)) > P_MIN

    def test_coefficient_conditional(self, rng):
        r, sigma = np.array([0.5, 1.2, 0.3, 2.0]), 0.7
        draws = np.array([self.model.draw_beta(r, sigma, rng)[0] for _ in range(20_000)])
        assert self._check(draws, lambda b: self._log_joint(b, r, sigma)) > P_MIN

    def test_rate_conditional(self, rng):
        beta, sigma, r = 0.9, 0.7, np.array([0.5, 1.2, 0.3, 2.0])
        draws = np.array([self.model.draw_rates(np.array([beta]), sigma, rng)[1] for _ in range(20_000)])

        def logd(v):
            return self._log_joint(beta, np.array([r[0], v, r[2], r[3]]), sigma)

        assert self._check(draws, logd, (0, np.inf)) > P_MIN

    def test_envelope_group_draw_targets_scale_given_rates(self, rng):
        # beta integrated out: z - theta R ~ N(W beta0, W B0 W' + diag(R sigma tau^2))
        m, r = self.model, np.array([0.5, 1.2, 0.3, 2.0])
        x = m.join(np.array([0.9]), r, 0.7)
        draws = np.array([m.draw_group(1, x, 0.7, rng) for _ in range(8_000)]) * 0.7

        def logd(s):
            cov = 10.0 * QR_W @ QR_W.T + np.diag(r * s * m.tau2)
            return (stats.invgamma.logpdf(s, 2.0, scale=2.0) + np.sum(stats.expon.logpdf(r, scale=s))
                    + stats.multivariate_normal.logpdf(QR_Z - m.theta * r, np.zeros(4), cov))

        assert self._check(draws, logd, (0, np.inf)) > P_MIN

    def test_conditional_group_draw_targets_full_conditional(self, rng):
        m, beta, r = self.model, 0.9, np.array([0.5, 1.2, 0.3, 2.0])
        x = m.join(np.array([beta]), r, 0.7)
        draws = np.array([m.draw_group(2, x, 0.7, rng) for _ in range(8_000)]) * 0.7
        assert self._check(draws, lambda s: self._log_joint(beta, r, s), (0, np.inf)) > P_MIN

    def test_trivial_group_is_two_block_step(self):
        x0 = self.model.initial_state()
        a = run_chain(lambda x, r: quantreg_two_block_step(self.model, x, r), x0, 200, make_rng(3)).draws
        b = run_chain(lambda x, r: quantreg_two_block_pxda_step(self.model, 1, x, r, group=trivial_group()),
                      x0, 200, make_rng(3)).draws
        np.testing.assert_array_equal(a, b)

    @pytest.mark.slow
    def test_variants_agree(self):
        chains = {}
        for name, step, n in [("two-block", quantreg_two_block_step, 20_000),
                              ("j2", lambda m, x, r: quantreg_two_block_pxda_step(m, 2, x, r), 20_000),
                              ("j1", lambda m, x, r: quantreg_two_block_pxda_step(m, 1, x, r), 15_000)]:
            trace = run_chain(lambda x, r: step(self.model, x, r), self.model.initial_state(), n,
                              make_rng(50 + len(chains)), burn_in=500)
            chains[name] = trace.draws
        for col in (0, -1):
            assert agree(chains["j2"][:, col], chains["j1"][:, col]), col
            assert agree(chains["j2"][:, col], chains["two-block"][:, col]), col

    def test_dispersed_starts(self):
        m = self.model
        starts = [m.join(np.array([-10.0]), np.full(4, 0.1), 0.1), m.join(np.array([10.0]), np.full(4, 5.0), 5.0)]
        assert dispersed_agreement(lambda x, r: quantreg_two_block_pxda_step(m, 2, x, r),
                                   starts, 20_000, 35, lambda d: d[:, 0])
