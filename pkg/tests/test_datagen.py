"""Data generation tests: copula marginals and dependence, outcome moment
laws (checked against law-of-total-variance oracles), reproducibility, and
the coefficient search."""

import numpy as np
import pytest

from qlpower import (
    CovariateDesign,
    Link,
    ModelSpec,
    OutcomeCase,
    OutcomeKind,
    RngStream,
    VarianceFunction,
    coefficient_search,
    gen_covariates,
    gen_dataset,
    gen_outcome,
    ncp_for_power,
)
from qlpower.errors import DomainError, InvalidDispersionError

from conftest import LOG_BETA, LOG_LAM, mixture_spec


class TestCovariates:
    def test_category_marginals_independent(self):
        z, d1, d2 = gen_covariates(CovariateDesign(rho=0.0), 10**6, RngStream(1, 0))
        for freq in (np.mean(d1), np.mean(d2), 1.0 - np.mean(d1) - np.mean(d2)):
            assert freq == pytest.approx(1.0 / 3.0, abs=0.0015)

    @pytest.mark.parametrize("rho", [0.0, 0.3, 0.6])
    def test_category_marginals_all_rho(self, rho):
        # the copula changes dependence, never the marginals
        _, d1, d2 = gen_covariates(CovariateDesign(rho=rho), 4 * 10**5, RngStream(2, 0))
        se4 = 4 * np.sqrt((1 / 3) * (2 / 3) / (4 * 10**5))
        assert np.mean(d1) == pytest.approx(1 / 3, abs=se4)
        assert np.mean(d2) == pytest.approx(1 / 3, abs=se4)

    def test_comonotone_copula_categories_follow_z(self):
        z, d1, d2 = gen_covariates(CovariateDesign(rho=1.0), 50_000, RngStream(3, 0))
        category = d1 + 2 * d2
        expected = np.digitize(z, [1 / 3, 2 / 3])
        assert np.array_equal(category, expected)

    def test_positive_dependence(self):
        z, _, d2 = gen_covariates(CovariateDesign(rho=0.3), 10**6, RngStream(4, 0))
        upper = z > 2 / 3
        assert np.mean(d2[upper]) > 1 / 3

    def test_uniform_marginal_ks(self):
        # Kolmogorov-Smirnov against the uniform CDF; 1% critical value ~ 1.63/sqrt(n)
        n = 10**5
        z, _, _ = gen_covariates(CovariateDesign(rho=0.4), n, RngStream(5, 0))
        order = np.sort(z)
        grid = np.arange(1, n + 1) / n
        ks = max(np.max(np.abs(grid - order)), np.max(np.abs(order - (grid - 1 / n))))
        assert ks < 1.63 / np.sqrt(n)

    def test_rho_domain(self):
        with pytest.raises(DomainError):
            CovariateDesign(rho=1.5)


def _moment_check(case, mu, n, seed, expected_var):
    y = gen_outcome(case, np.full(n, mu), RngStream(seed, 0))
    mean_se = np.std(y) / np.sqrt(n)
    assert np.mean(y) == pytest.approx(mu, abs=4 * mean_se)
    centered = y - np.mean(y)
    var_se = np.sqrt(max(np.mean(centered**4) - np.var(y) ** 2, 0.0) / n)
    assert np.var(y) == pytest.approx(expected_var, abs=4 * var_se)


class TestOutcomes:
    def test_poisson_var_eq_mean(self):
        _moment_check(OutcomeCase(OutcomeKind.POISSON_VAR_EQ_MEAN), 4.0, 10**6, 10, 4.0)

    def test_mixture_var_is_1p5_mu(self):
        # law of total variance: 0.5*mu + 0.5*(mu + mu) = 1.5*mu
        case = OutcomeCase(OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN)
        assert case.sigma2 == 1.5
        y = gen_outcome(case, np.full(10**6, 4.0), RngStream(11, 0))
        assert np.mean(y) == pytest.approx(4.0, abs=0.01)
        assert np.var(y) == pytest.approx(6.0, abs=0.06)

    def test_modified_nb_constant_cv(self):
        # sigma2 = 2 reproduces Var = 2 mu^2 at mu = e
        mu = float(np.e)
        case = OutcomeCase(OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ, sigma2=2.0)
        y = gen_outcome(case, np.full(10**6, mu), RngStream(12, 0))
        assert np.var(y) == pytest.approx(2 * mu**2, rel=0.02)

    def test_gamma_var_prop_mean(self):
        _moment_check(OutcomeCase(OutcomeKind.GAMMA_VAR_PROP_MEAN, sigma2=0.5), 3.0, 10**6, 13, 1.5)

    def test_gamma_var_prop_mean_sq(self):
        _moment_check(OutcomeCase(OutcomeKind.GAMMA_VAR_PROP_MEAN_SQ, sigma2=0.16), 3.0, 10**6, 14, 0.16 * 9.0)

    @pytest.mark.parametrize(
        "kind,mu,sigma2,var_law",
        [
            (OutcomeKind.POISSON_VAR_EQ_MEAN, 2.0, None, lambda m, s: m),
            (OutcomeKind.MIXTURE_POISSON_VAR_PROP_MEAN, 2.0, None, lambda m, s: 1.5 * m),
            (OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ, 3.0, 2.0, lambda m, s: s * m * m),
            (OutcomeKind.GAMMA_VAR_PROP_MEAN, 5.0, 0.5, lambda m, s: s * m),
            (OutcomeKind.GAMMA_VAR_PROP_MEAN_SQ, 5.0, 0.16, lambda m, s: s * m * m),
        ],
    )
    def test_moment_laws_across_cases(self, kind, mu, sigma2, var_law):
        case = OutcomeCase(kind, sigma2=sigma2)
        _moment_check(case, mu, 4 * 10**5, hash(kind) % 1000, var_law(mu, case.sigma2))

    def test_nb_rejects_small_dispersion_mean(self):
        case = OutcomeCase(OutcomeKind.MODIFIED_NB_VAR_PROP_MEAN_SQ, sigma2=2.0)
        with pytest.raises(InvalidDispersionError):
            gen_outcome(case, 0.4, RngStream(0, 0))  # sigma2*mu = 0.8 <= 1

    def test_implied_sigma2_conflicts(self):
        with pytest.raises(InvalidDispersionError):
            OutcomeCase(OutcomeKind.POISSON_VAR_EQ_MEAN, sigma2=2.0)
        with pytest.raises(InvalidDispersionError):
            OutcomeCase(OutcomeKind.GAMMA_VAR_PROP_MEAN)  # needs explicit sigma2


class TestGenDataset:
    def test_log_poisson_population_mean(self):
        # closed-form E[Y] at rho=0: E[e^eta] factors over Z and X
        spec = ModelSpec(Link.LOG, VarianceFunction.MEAN, 1.0, LOG_LAM, LOG_BETA)
        case = OutcomeCase(OutcomeKind.POISSON_VAR_EQ_MEAN)
        n = 4 * 10**5
        data = gen_dataset(spec, CovariateDesign(rho=0.0), case, n, RngStream(20, 0))
        ez = np.exp(1.0) * (np.exp(0.15) - 1.0) / 0.15
        ex = (1.0 + np.exp(0.1) + np.exp(0.25)) / 3.0
        expected = ez * ex
        se = np.std(data.y) / np.sqrt(n)
        assert np.mean(data.y) == pytest.approx(expected, abs=4 * se)

    def test_identity_means_positive(self):
        spec = ModelSpec(Link.IDENTITY, VarianceFunction.MEAN, 1.0, [4.0, 0.4], [0.4, 0.81])
        case = OutcomeCase(OutcomeKind.POISSON_VAR_EQ_MEAN)
        data = gen_dataset(spec, CovariateDesign(rho=0.3), case, 10_000, RngStream(21, 0))
        mu = data.z @ spec.lam + data.x @ spec.beta
        assert np.all(mu > 0)

    def test_bitwise_reproducible(self):
        spec, design, case = mixture_spec()
        d1 = gen_dataset(spec, design, case, 500, RngStream(22, 9))
        d2 = gen_dataset(spec, design, case, 500, RngStream(22, 9))
        assert np.array_equal(d1.y, d2.y)
        assert np.array_equal(d1.z, d2.z)
        assert np.array_equal(d1.x, d2.x)


class TestCoefficientSearch:
    def test_recovers_reference_beta2(self, delta_df2):
        # var ~ mean count case targets n = 400 at rho = 0
        beta2 = coefficient_search(
            400, LOG_LAM, 0.1, delta_df2, Link.LOG, VarianceFunction.MEAN, 1.5,
            CovariateDesign(rho=0.0), beta2_init=0.1, mc_size=400_000, seed=30,
        )
        assert beta2 == pytest.approx(0.25, abs=0.01)

    def test_seeded_at_answer_returns_immediately(self, delta_df2):
        first = coefficient_search(
            400, LOG_LAM, 0.1, delta_df2, Link.LOG, VarianceFunction.MEAN, 1.5,
            CovariateDesign(rho=0.0), beta2_init=0.1, mc_size=200_000, seed=31,
        )
        again = coefficient_search(
            400, LOG_LAM, 0.1, delta_df2, Link.LOG, VarianceFunction.MEAN, 1.5,
            CovariateDesign(rho=0.0), beta2_init=first, mc_size=200_000, seed=31,
        )
        assert again == first

    def test_larger_target_gives_smaller_beta2(self, delta_df2):
        values = []
        for target in (300, 500):
            values.append(
                coefficient_search(
                    target, LOG_LAM, 0.1, delta_df2, Link.LOG, VarianceFunction.MEAN, 1.5,
                    CovariateDesign(rho=0.0), beta2_init=0.2, mc_size=200_000, seed=32,
                )
            )
        assert values[0] > values[1]
