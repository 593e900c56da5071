import numpy as np
import pytest
from scipy import integrate, stats

from bayesarfima.errors import ConfigError, NumericalError, UnsupportedOperationError
from bayesarfima.likelihood import AugmentedSeries
from bayesarfima.process import InnovationSpec, MemoryParams, ProcessParams, ReparamMemory
from bayesarfima.samplers import (ChainState, PriorSpec, Sampler, TuningSpec, backward_projection, box_log_mass,
                                  gibbs_update_mu, gibbs_update_sigma, joint_update_memory, log_ratio_d,
                                  log_ratio_memory, log_ratio_mu, log_ratio_sigma, mh_update_d, mh_update_mu,
                                  mh_update_sigma, mu_conditional, run_chain, sample_trunc_mvn, sample_trunc_normal,
                                  sigma_conditional, update_xA)
from bayesarfima.simulate import simulate_fid_exact
from conftest import make_state


@pytest.fixture
def series():
    return simulate_fid_exact(128, 0.2, mu=1.0, seed=11)


def test_zero_step_log_ratios_vanish(series):
    prior = PriorSpec(mu="gaussian", sigma="root_inverse_gamma", d="gaussian")
    state = make_state(series, d=0.15, sigma=1.2)
    assert log_ratio_mu(state, prior, state.psi.mu)[0] == pytest.approx(0.0, abs=1e-9)
    assert log_ratio_sigma(state, prior, state.psi.sigma)[0] == pytest.approx(0.0, abs=1e-9)
    assert log_ratio_d(state, TuningSpec(), prior, state.psi.memory.d)[0] == pytest.approx(0.0, abs=1e-9)

    arma = make_state(series, d=0.1, phi=[0.3], theta=[-0.2])
    cov = np.array([[0.01, 0.002, 0.0], [0.002, 0.02, 0.001], [0.0, 0.001, 0.02]])
    same = ReparamMemory(arma.reparam.d, arma.reparam.varphi, arma.reparam.vartheta)
    assert log_ratio_memory(arma, prior, same, cov)[0] == pytest.approx(0.0, abs=1e-9)


def test_mu_ratio_reduces_to_iid_gaussian(rng):
    x = rng.standard_normal(50)
    state = make_state(x, d=0.0, mu=0.1, sigma=0.8)
    xi = 0.35
    expected = -(np.sum((x - xi) ** 2) - np.sum((x - 0.1) ** 2)) / (2 * 0.8 ** 2)
    assert log_ratio_mu(state, PriorSpec(), xi)[0] == pytest.approx(expected, rel=1e-10)


def test_mu_conditional_white_noise(rng):
    x = rng.standard_normal(40) + 3.0
    state = make_state(x, d=0.0, sigma=2.0)
    mean, var = mu_conditional(state, PriorSpec())
    assert mean == pytest.approx(x.mean(), rel=1e-12)
    assert var == pytest.approx(4.0 / 40, rel=1e-12)

    vague, _ = mu_conditional(state, PriorSpec(mu="gaussian", sigma0=1e6))
    assert vague == pytest.approx(mean, abs=1e-6)


def test_mu_conditional_exact_mode_white_noise(rng):
    x = rng.standard_normal(40) + 3.0
    state = make_state(x, d=0.0, sigma=2.0, mode="exact")
    mean, var = mu_conditional(state, PriorSpec())
    assert mean == pytest.approx(x.mean(), rel=1e-10)
    assert var == pytest.approx(4.0 / 40, rel=1e-10)


def test_sigma_conditional_white_noise(rng):
    x = rng.standard_normal(30)
    state = make_state(x, d=0.0, mu=0.2)
    alpha, beta = sigma_conditional(state, PriorSpec())
    assert alpha == 15.0
    assert beta == pytest.approx(0.5 * np.sum((x - 0.2) ** 2), rel=1e-12)


def test_gibbs_mu_draws_follow_conditional(series):
    state = make_state(series, d=0.2, sigma=1.0, seed=4)
    mean, var = mu_conditional(state, PriorSpec())
    draws = np.array([gibbs_update_mu(state, PriorSpec()).psi.mu for _ in range(2000)])
    assert stats.kstest(draws, stats.norm(mean, np.sqrt(var)).cdf).pvalue > 0.01


def test_gibbs_sigma_reciprocal_squares_are_gamma(series):
    state = make_state(series, d=0.2, seed=5)
    alpha, beta = sigma_conditional(state, PriorSpec())
    tau = np.array([gibbs_update_sigma(state, PriorSpec()).psi.sigma ** -2 for _ in range(2000)])
    assert stats.kstest(tau, stats.gamma(alpha, scale=1.0 / beta).cdf).pvalue > 0.01


def test_gibbs_needs_gaussian_innovations(series):
    state = make_state(series, innovation=InnovationSpec("student_t", 1.0, 5.0))
    with pytest.raises(UnsupportedOperationError):
        gibbs_update_mu(state, PriorSpec())
    with pytest.raises(UnsupportedOperationError):
        gibbs_update_sigma(state, PriorSpec())


def test_trunc_normal_inside_bounds(rng):
    for _ in range(500):
        value, trials = sample_trunc_normal(0.45, 0.3, -0.5, 0.5, rng)
        assert -0.5 < value < 0.5
        assert trials >= 1
    with pytest.raises(ValueError):
        sample_trunc_normal(0.0, 1.0, 0.5, -0.5, rng)


def test_trunc_normal_needs_few_trials(rng):
    for d in np.linspace(-0.4, 0.4, 9):
        trials = [sample_trunc_normal(d, 0.5, -0.5, 0.5, rng)[1] for _ in range(4000)]
        assert np.mean(trials) < 2.0


def test_trunc_normal_mean_matches_quadrature(rng):
    mean, sd = 0.3, 0.4
    draws = np.array([sample_trunc_normal(mean, sd, -0.5, 0.5, rng)[0] for _ in range(100000)])
    mass = stats.norm.cdf(0.5, mean, sd) - stats.norm.cdf(-0.5, mean, sd)
    expected, _ = integrate.quad(lambda v: v * stats.norm.pdf(v, mean, sd) / mass, -0.5, 0.5)
    assert abs(draws.mean() - expected) < 3 * draws.std() / np.sqrt(draws.size)


def test_trunc_normal_cap():
    with pytest.raises(NumericalError):
        sample_trunc_normal(50.0, 0.1, -0.5, 0.5, np.random.default_rng(0), max_trials=100)


def test_trunc_mvn_inside_hypercuboid(rng):
    upper = ReparamMemory.bounds(2, 1)
    chol = np.linalg.cholesky(np.diag([0.3, 0.5, 0.5, 0.5]))
    for _ in range(300):
        value, _ = sample_trunc_mvn(np.array([0.45, 0.9, -0.9, 0.0]), chol, upper, rng)
        assert np.all(np.abs(value) < upper)


def test_box_mass_paths_agree():
    center = np.array([0.2, 0.5, -0.3])
    upper = np.array([0.5, 1.0, 1.0])
    diagonal = np.diag([0.04, 0.09, 0.01])
    nearly = diagonal.copy()
    nearly[0, 1] = nearly[1, 0] = 1e-9
    assert box_log_mass(center, nearly, upper) == pytest.approx(box_log_mass(center, diagonal, upper), abs=1e-4)


def test_mh_kernels_keep_invariants(series):
    state = make_state(series, d=0.1, phi=[0.2], seed=6)
    tuning = TuningSpec(sigma_mu=0.1).validate()
    prior = PriorSpec()
    for _ in range(100):
        mh_update_mu(state, tuning, prior)
        mh_update_sigma(state, tuning, prior)
        joint_update_memory(state, tuning, prior)
        state.check()
    white = make_state(series, seed=7)
    for _ in range(100):
        mh_update_d(white, tuning, prior)
        assert abs(white.psi.memory.d) < 0.5
    assert set(state.acceptance_rates()) == {"mu", "sigma", "memory"}


def test_joint_update_rejects_wrong_covariance(series):
    state = make_state(series, d=0.1, phi=[0.2])
    with pytest.raises(ConfigError):
        joint_update_memory(state, TuningSpec(), Sigma=np.eye(3))


def test_check_detects_inconsistent_state(series):
    state = make_state(series, d=0.1, phi=[0.2])
    state.psi.memory = MemoryParams(0.1, [0.5])
    with pytest.raises(NumericalError):
        state.check()


def test_check_maps_pacf_once(series, monkeypatch):
    state = make_state(series, d=0.1, phi=[0.2], theta=[-0.3])
    calls = []
    to_memory = ReparamMemory.to_memory

    def counting(self):
        calls.append(self)
        return to_memory(self)

    monkeypatch.setattr(ReparamMemory, "to_memory", counting)
    state.check()
    assert len(calls) == 1
    state.psi.memory = MemoryParams(0.1, [0.2], [0.4])
    with pytest.raises(NumericalError):
        state.check()


def _small_state(x, P, d, seed):
    psi = ProcessParams(0.3, InnovationSpec(sigma=0.7), MemoryParams(d))
    return ChainState(AugmentedSeries(x, P=P), psi, "approx", np.random.default_rng(seed))


def test_backward_projection_white_noise(series):
    state = _small_state(series, 10, 0.0, seed=5)
    proposal, _ = backward_projection(state)
    eps = np.random.default_rng(5).standard_normal(10)
    assert proposal.size == 10
    np.testing.assert_allclose(proposal, 0.3 + 0.7 * eps, rtol=0, atol=1e-14)


def test_backward_projection_uses_reversed_series(series):
    state = _small_state(series, 12, 0.3, seed=8)
    proposal, _ = backward_projection(state)
    pi = state.ctx.pi
    eps = np.random.default_rng(8).standard_normal(12)
    # The value next to the observed series is driven by x_1, x_2, ... read backwards in time.
    first = 0.7 * eps[0] + pi.sum() * 0.3 - pi[1:] @ series[:12]
    assert proposal[0] == pytest.approx(first, rel=1e-12)


def test_update_xA_keeps_length_and_mode(series):
    state = _small_state(series, 16, 0.2, seed=9)
    for _ in range(20):
        update_xA(state)
    assert state.aug.P == 16
    assert state.proposed["x_A"] == 20
    exact = make_state(series, mode="exact")
    with pytest.raises(UnsupportedOperationError):
        update_xA(exact)


def test_run_chain_is_deterministic(series):
    first = run_chain(series, iters=300, burnin=100, thin=2, seed=7)
    second = run_chain(series, iters=300, burnin=100, thin=2, seed=7)
    other = run_chain(series, iters=300, burnin=100, thin=2, seed=8)
    assert np.array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)
    assert len(first) == 100
    assert first.columns == ["iter", "d", "mu", "sigma"]
    np.testing.assert_array_equal(first["iter"], np.arange(100, 300, 2))


def test_run_chain_invariants(series):
    samples = run_chain(series, model=(1, 1), iters=400, burnin=0, seed=3)
    assert np.all(np.abs(samples["d"]) < 0.5)
    assert np.all(np.abs(samples["varphi_1"]) < 1)
    assert np.all(np.abs(samples["vartheta_1"]) < 1)
    assert np.all(samples["sigma"] > 0)
    assert set(samples.acceptance) == {"mu", "sigma", "memory"}
    assert len(samples.logbook) == 1


def test_run_chain_variants(series):
    exact = run_chain(series, iters=200, burnin=50, seed=1, likelihood="exact")
    assert exact.meta["likelihood"] == "exact"
    heavy = run_chain(series, iters=200, burnin=50, seed=1, innovation=InnovationSpec("student_t", 1.0, 5.0))
    assert heavy.meta["gibbs"] is False
    assert 0 < heavy.acceptance["mu"] < 1
    xa = run_chain(series, iters=200, burnin=50, seed=1, tuning=TuningSpec(xA_update_period=10), truncation=32)
    assert xa.acceptance["x_A"] >= 0
    assert xa.meta["truncation"] == 32


def test_sampler_validation(series):
    with pytest.raises(ValueError):
        Sampler(series, iters=100, burnin=100)
    with pytest.raises(ConfigError):
        Sampler(series, model=(1, 0), likelihood="exact")
    with pytest.raises(ConfigError):
        Sampler(series, tuning=TuningSpec(Sigma_varpi=np.array([[1.0, 2.0], [2.0, 1.0]])))
    with pytest.raises(ConfigError):
        Sampler(series, tuning=TuningSpec(sigma_d=-0.1))
    with pytest.raises(ConfigError):
        Sampler(series, innovation=InnovationSpec("student_t", 1.0, 4.0), tuning=TuningSpec(gibbs=True))
    with pytest.raises(ConfigError):
        Sampler(series, priors=PriorSpec(mu="laplace"))


def test_prior_log_densities():
    prior = PriorSpec(sigma="root_inverse_gamma", alpha0=2.0, beta0=3.0)
    # 1 / sigma^2 ~ Gamma(alpha0, rate beta0) makes the density of sigma integrate to one.
    total, _ = integrate.quad(lambda s: np.exp(prior.log_sigma(s)), 0, np.inf)
    assert total == pytest.approx(1.0, rel=1e-6)
    assert PriorSpec().log_d(0.5) == -np.inf
    assert PriorSpec().log_memory(ReparamMemory(0.1, [0.3])) == pytest.approx(-np.log(2.0))


@pytest.mark.slow
def test_white_noise_posterior_of_d():
    x = simulate_fid_exact(1024, 0.0, seed=2024)
    summary = run_chain(x, iters=6000, burnin=1000, seed=1)
    d = summary["d"]
    assert abs(d.mean()) < 0.08
    assert 0.015 < d.std() < 0.04


@pytest.mark.slow
def test_prior_only_chain_reproduces_priors():
    x = simulate_fid_exact(32, 0.0, seed=1)
    priors = PriorSpec(mu="gaussian", mu0=1.0, sigma0=2.0, sigma="root_inverse_gamma", alpha0=3.0, beta0=2.0)
    tuning = TuningSpec(sigma_mu=3.0, sigma_sigma=0.6, sigma_d=0.3)
    samples = run_chain(x, priors=priors, tuning=tuning, iters=60000, burnin=2000, thin=40, seed=5,
                        prior_only=True)
    assert stats.kstest(samples["mu"], stats.norm(1.0, 2.0).cdf).pvalue > 0.01
    assert stats.kstest(samples["d"], stats.uniform(-0.5, 1.0).cdf).pvalue > 0.01
    tau = samples["sigma"] ** -2
    assert stats.kstest(tau, stats.gamma(3.0, scale=1 / 2.0).cdf).pvalue > 0.01


@pytest.mark.slow
def test_gibbs_and_mh_agree():
    x = simulate_fid_exact(512, 0.1, mu=2.0, seed=9)
    gibbs = run_chain(x, iters=8000, burnin=1000, seed=1)
    mh = run_chain(x, iters=8000, burnin=1000, seed=2, tuning=TuningSpec(gibbs=False))
    for name, tol in (("d", 0.02), ("mu", 0.1), ("sigma", 0.02)):
        assert abs(gibbs[name].mean() - mh[name].mean()) < tol


@pytest.mark.slow
def test_presample_updates_do_not_move_d():
    x = simulate_fid_exact(256, 0.25, seed=4)
    never = run_chain(x, iters=6000, burnin=1000, seed=1)
    often = run_chain(x, iters=6000, burnin=1000, seed=1, tuning=TuningSpec(xA_update_period=50))
    assert abs(never["d"].mean() - often["d"].mean()) < 2 * max(never["d"].std(), 0.01) / np.sqrt(50) + 0.02
