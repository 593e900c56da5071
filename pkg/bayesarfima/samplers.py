"""
Fixed-model MCMC for ARFIMA(p, d, q): random-walk Metropolis-Hastings kernels
for mu, sigma and d, conjugate Gibbs alternatives for mu and sigma, joint
hypercuboid-truncated Gaussian updates of the memory parameter in PACF
coordinates, and the optional independence update of the pre-sample x_A.

Kernels take the chain state as first argument, update it in place and
return it. The :class:`Sampler` driver registers them in a DEAP toolbox and
cycles through them.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from deap import base, tools
from scipy import stats
from scipy.special import gammaln

from bayesarfima.auxiliary_functions import make_rng, retained_indices
from bayesarfima.errors import ConfigError, DataError, NumericalError, UnsupportedOperationError
from bayesarfima.likelihood import MODES, AugmentedSeries, LikelihoodContext, approx_loglik
from bayesarfima.process import InnovationSpec, ProcessParams, ReparamMemory

logger = logging.getLogger(__name__)

MAX_TRIALS = 10 ** 6
START_POINTS = (-0.4, -0.2, 0.0, 0.2, 0.4)
# Fixed seed of the quasi-Monte Carlo box probabilities, so acceptance ratios
# are reproducible.
BOX_MASS_SEED = 20130


@dataclass
class PriorSpec:
    """
    Independent priors on mu, sigma and the memory parameter.

    :param mu: 'flat' or 'gaussian' (N(mu0, sigma0^2)).
    :param sigma: 'diffuse' (p(sigma) ~ 1/sigma) or 'root_inverse_gamma' R(alpha0, beta0).
    :param d: 'uniform' on (-1/2, 1/2) or 'gaussian' N(d_mean, d_sd^2) truncated to it.
    """
    mu: str = "flat"
    mu0: float = 0.0
    sigma0: float = 100.0
    sigma: str = "diffuse"
    alpha0: float = 0.01
    beta0: float = 0.01
    d: str = "uniform"
    d_mean: float = 0.0
    d_sd: float = 0.15

    def validate(self):
        if self.mu not in ("flat", "gaussian"):
            raise ConfigError("Unknown mu prior {!r}".format(self.mu))
        if self.sigma not in ("diffuse", "root_inverse_gamma"):
            raise ConfigError("Unknown sigma prior {!r}".format(self.sigma))
        if self.d not in ("uniform", "gaussian"):
            raise ConfigError("Unknown d prior {!r}".format(self.d))
        if self.mu == "gaussian" and not self.sigma0 > 0:
            raise ConfigError("sigma0 must be positive")
        if self.sigma == "root_inverse_gamma" and not (self.alpha0 > 0 and self.beta0 > 0):
            raise ConfigError("alpha0 and beta0 must be positive")
        if self.d == "gaussian" and not self.d_sd > 0:
            raise ConfigError("d_sd must be positive")
        return self

    @property
    def proper(self):
        return self.mu == "gaussian" and self.sigma == "root_inverse_gamma"

    def mu_precision(self):
        return 0.0 if self.mu == "flat" else 1.0 / self.sigma0 ** 2

    def sigma_shape_rate(self):
        return (0.0, 0.0) if self.sigma == "diffuse" else (self.alpha0, self.beta0)

    def log_mu(self, mu):
        if self.mu == "flat":
            return 0.0
        return stats.norm.logpdf(mu, self.mu0, self.sigma0)

    def log_sigma(self, sigma):
        if not sigma > 0:
            return -np.inf
        if self.sigma == "diffuse":
            return -np.log(sigma)
        a, b = self.alpha0, self.beta0
        return np.log(2.0) - gammaln(a) + a * np.log(b) - (2 * a + 1) * np.log(sigma) - b / sigma ** 2

    def log_d(self, d):
        if not abs(d) < 0.5:
            return -np.inf
        if self.d == "uniform":
            return 0.0
        return stats.norm.logpdf(d, self.d_mean, self.d_sd)

    def log_memory(self, reparam):
        """
        Prior on the memory parameter in PACF coordinates: the d prior times a
        uniform density on (-1, 1)^(p+q).
        """
        if not reparam.inside():
            return -np.inf
        return self.log_d(reparam.d) - (reparam.p + reparam.q) * np.log(2.0)


@dataclass
class TuningSpec:
    """
    Proposal scales of the kernels.

    :param sigma_mu: RW scale for mu (default: sample sd / sqrt(n)).
    :param sigma_sigma: RW scale for log(sigma).
    :param sigma_d: RW scale for d (truncated to (-1/2, 1/2)).
    :param sigma_pacf: Default scale of PACF components in joint updates.
    :param Sigma_varpi: Proposal covariance of the joint memory update.
    :param xA_update_period: Update x_A every this many iterations (0 = never).
    :param gibbs: Use Gibbs updates for mu and sigma (None = when Gaussian).
    """
    sigma_mu: Optional[float] = None
    sigma_sigma: float = 0.1
    sigma_d: float = 0.05
    sigma_pacf: float = 0.05
    Sigma_varpi: Optional[np.ndarray] = field(default=None, repr=False)
    xA_update_period: int = 0
    gibbs: Optional[bool] = None

    def validate(self):
        for name in ("sigma_sigma", "sigma_d", "sigma_pacf"):
            if not getattr(self, name) > 0:
                raise ConfigError("{} must be positive".format(name))
        if self.sigma_mu is not None and not self.sigma_mu > 0:
            raise ConfigError("sigma_mu must be positive")
        if int(self.xA_update_period) != self.xA_update_period or self.xA_update_period < 0:
            raise ConfigError("xA_update_period must be a non-negative integer")
        if self.Sigma_varpi is not None:
            self.Sigma_varpi = check_covariance(self.Sigma_varpi)
        return self

    def resolve(self, x):
        """
        :param x: Observed series.
        :return: A validated copy with data-dependent defaults filled in.
        """
        tuning = replace(self)
        if tuning.sigma_mu is None:
            scale = np.std(x, ddof=1) if len(x) > 1 else 1.0
            tuning.sigma_mu = float(scale / np.sqrt(len(x))) if scale > 0 else 1.0
        return tuning.validate()

    def covariance_for(self, p, q):
        """
        :return: ``Sigma_varpi`` if it matches an r = p+q+1 dimensional model,
                 otherwise diag(sigma_d^2, sigma_pacf^2, ...).
        """
        r = p + q + 1
        if self.Sigma_varpi is not None and self.Sigma_varpi.shape == (r, r):
            return self.Sigma_varpi
        return np.diag([self.sigma_d ** 2] + [self.sigma_pacf ** 2] * (p + q))


def check_covariance(matrix):
    """
    :param matrix: Candidate covariance matrix.
    :return: The matrix as a float array.
    :raises ConfigError: If it is not symmetric positive definite.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[0] != matrix.shape[1] or not np.allclose(matrix, matrix.T):
        raise ConfigError("Proposal covariance must be a symmetric square matrix")
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        raise ConfigError("Proposal covariance is not positive definite")
    return matrix


class ChainState:
    """
    Current point of a chain: psi, its PACF coordinates, the augmented series,
    the cached likelihood pieces and the chain's random stream.

    :param aug: :class:`AugmentedSeries`.
    :param psi: :class:`ProcessParams`.
    :param mode: Likelihood mode, 'approx' or 'exact'.
    :param rng: ``numpy.random.Generator`` owned by this chain.
    :param prior_only: If True the likelihood is taken as constant.
    """
    def __init__(self, aug, psi, mode, rng, prior_only=False):
        self.aug = aug
        self.psi = psi
        self.reparam = psi.memory.to_reparam()
        self.rng = rng
        self.prior_only = prior_only
        self.ctx = LikelihoodContext(aug, psi.memory, mode)
        self.loglik = self.evaluate()
        self.proposed = Counter()
        self.accepted = Counter()

    @property
    def model(self):
        return self.reparam.p, self.reparam.q

    @property
    def n(self):
        return self.aug.n

    def evaluate(self, ctx=None, mu=None, innovation=None):
        """
        :return: Log-likelihood at the state, with any of the cached context,
                 mu or innovation replaced by the given ones.
        """
        if self.prior_only:
            return 0.0
        ctx = self.ctx if ctx is None else ctx
        mu = self.psi.mu if mu is None else mu
        innovation = self.psi.innovation if innovation is None else innovation
        return ctx.loglik(mu, innovation)

    def set_memory(self, reparam, memory, ctx, loglik):
        self.reparam = reparam
        self.psi.memory = memory
        self.ctx = ctx
        self.loglik = loglik

    def record(self, kernel, accepted):
        self.proposed[kernel] += 1
        if accepted:
            self.accepted[kernel] += 1

    def acceptance_rates(self):
        return {k: self.accepted[k] / self.proposed[k] for k in sorted(self.proposed)}

    def check(self):
        """
        Hard invariants of every iteration.
        """
        if not self.psi.sigma > 0:
            raise NumericalError("sigma left (0, inf): {}".format(self.psi.sigma))
        if not self.reparam.inside():
            raise NumericalError("Memory parameter left the hypercuboid: {!r}".format(self.reparam))
        memory = self.psi.memory
        mapped = self.reparam.to_memory()
        if abs(memory.d - self.reparam.d) > 0 or not (
                np.allclose(mapped.phi, memory.phi, rtol=0, atol=1e-10)
                and np.allclose(mapped.theta, memory.theta, rtol=0, atol=1e-10)):
            raise NumericalError("PACF and polynomial coordinates disagree")


def _accept(state, log_a):
    return np.log(state.rng.uniform()) < log_a


def log_ratio_mu(state, prior, xi):
    """
    :return: (log acceptance ratio of mu -> xi, log-likelihood at xi).
    """
    ll = state.evaluate(mu=xi)
    return ll - state.loglik + prior.log_mu(xi) - prior.log_mu(state.psi.mu), ll


def mh_update_mu(state, tuning, prior):
    """
    Symmetric random walk update xi ~ N(mu, sigma_mu^2).

    :param state: :class:`ChainState`.
    :param tuning: :class:`TuningSpec`.
    :param prior: :class:`PriorSpec`.
    :return: The updated state.
    """
    xi = state.psi.mu + tuning.sigma_mu * state.rng.standard_normal()
    log_a, ll = log_ratio_mu(state, prior, xi)
    accepted = _accept(state, log_a)
    if accepted:
        state.psi.mu = xi
        state.loglik = ll
    state.record("mu", accepted)
    return state


def log_ratio_sigma(state, prior, xi):
    """
    :return: (log acceptance ratio of sigma -> xi including the log-normal
             proposal asymmetry xi / sigma, log-likelihood at xi).
    """
    sigma = state.psi.sigma
    ll = state.evaluate(innovation=state.psi.innovation.with_sigma(xi))
    log_a = (ll - state.loglik + prior.log_sigma(xi) - prior.log_sigma(sigma)
             + np.log(xi) - np.log(sigma))
    return log_a, ll


def mh_update_sigma(state, tuning, prior):
    """
    Random walk on log(sigma): log(xi) = log(sigma) + N(0, sigma_sigma^2).
    """
    xi = state.psi.sigma * np.exp(tuning.sigma_sigma * state.rng.standard_normal())
    log_a, ll = log_ratio_sigma(state, prior, xi)
    accepted = _accept(state, log_a)
    if accepted:
        state.psi.innovation = state.psi.innovation.with_sigma(xi)
        state.loglik = ll
    state.record("sigma", accepted)
    return state


def _require_gaussian(state):
    if not state.psi.innovation.is_gaussian:
        raise UnsupportedOperationError("Gibbs updates require Gaussian innovations")
    if state.prior_only:
        raise UnsupportedOperationError("Gibbs updates are not defined for prior-only chains")


def mu_conditional(state, prior):
    """
    Mean and variance of the Gaussian full conditional of mu. In approximate
    mode the precision is 1/sigma0^2 + n Pi_P^2 / sigma^2, in exact mode
    1/sigma0^2 + 1' Sigma_d^-1 1 / sigma^2.
    """
    ctx = state.ctx
    s2 = state.psi.sigma ** 2
    prec0 = prior.mu_precision()
    if ctx.mode == "approx":
        precision = prec0 + ctx.n * ctx.Pi_P ** 2 / s2
        weighted = prec0 * prior.mu0 + ctx.Pi_P * np.sum(ctx.c) / s2
    else:
        precision = prec0 + ctx.oneS1 / s2
        weighted = prec0 * prior.mu0 + ctx.xS1 / s2
    if not precision > 0:
        raise NumericalError("Full conditional of mu is improper (precision {})".format(precision))
    return weighted / precision, 1.0 / precision


def gibbs_update_mu(state, prior):
    """
    Draw mu from its Gaussian full conditional.
    """
    _require_gaussian(state)
    mean, var = mu_conditional(state, prior)
    state.psi.mu = mean + np.sqrt(var) * state.rng.standard_normal()
    state.loglik = state.evaluate()
    state.record("mu", True)
    return state


def sigma_conditional(state, prior):
    """
    :return: (alpha, beta) of the root-inverse-gamma full conditional
             R(alpha0 + n/2, beta0 + S/2), S the residual sum of squares in
             approximate mode or Q(x|mu,d) in exact mode.
    """
    alpha0, beta0 = prior.sigma_shape_rate()
    return alpha0 + 0.5 * state.n, beta0 + 0.5 * state.ctx.sum_squares(state.psi.mu)


def gibbs_update_sigma(state, prior):
    """
    Draw sigma from its root-inverse-gamma full conditional (1/sigma^2 is
    Gamma(alpha, rate=beta)).
    """
    _require_gaussian(state)
    alpha, beta = sigma_conditional(state, prior)
    if not (alpha > 0 and beta > 0):
        raise NumericalError("Full conditional of sigma is degenerate (alpha={}, beta={})".format(alpha, beta))
    tau = state.rng.gamma(alpha, 1.0 / beta)
    state.psi.innovation = state.psi.innovation.with_sigma(1.0 / np.sqrt(tau))
    state.loglik = state.evaluate()
    state.record("sigma", True)
    return state


def sample_trunc_normal(mean, sd, a, b, rng, max_trials=MAX_TRIALS):
    """
    Rejection sampling from N(mean, sd^2) restricted to (a, b).

    :return: Tuple (value, number of trials).
    """
    if not a < b or not sd > 0:
        raise ValueError("Need a < b and sd > 0")
    for trial in range(1, max_trials + 1):
        value = mean + sd * rng.standard_normal()
        if a < value < b:
            return value, trial
    raise NumericalError("No draw inside ({}, {}) after {} trials".format(a, b, max_trials))


def trunc_normal_log_mass(center, sd, a=-0.5, b=0.5):
    """
    :return: log{Phi((b - center)/sd) - Phi((a - center)/sd)}.
    """
    return np.log(stats.norm.cdf((b - center) / sd) - stats.norm.cdf((a - center) / sd))


def log_ratio_d(state, tuning, prior, xi):
    """
    :return: (log acceptance ratio of d -> xi including the ratio of the
             truncation normalisers, proposed context, proposed log-likelihood).
    """
    d = state.psi.memory.d
    ctx = state.ctx.with_memory(state.psi.memory.with_d(xi))
    ll = state.evaluate(ctx=ctx)
    log_a = (ll - state.loglik + prior.log_d(xi) - prior.log_d(d)
             + trunc_normal_log_mass(d, tuning.sigma_d) - trunc_normal_log_mass(xi, tuning.sigma_d))
    return log_a, ctx, ll


def mh_update_d(state, tuning, prior):
    """
    Random walk xi ~ N^(-1/2, 1/2)(d, sigma_d^2); the coefficients, c and Pi_P
    (or log det and Q) are recomputed for the proposal.
    """
    xi, _ = sample_trunc_normal(state.psi.memory.d, tuning.sigma_d, -0.5, 0.5, state.rng)
    log_a, ctx, ll = log_ratio_d(state, tuning, prior, xi)
    accepted = _accept(state, log_a)
    if accepted:
        reparam = ReparamMemory(xi, state.reparam.varphi, state.reparam.vartheta)
        state.set_memory(reparam, ctx.memory, ctx, ll)
    state.record("d", accepted)
    return state


def sample_trunc_mvn(center, chol, upper, rng, max_trials=MAX_TRIALS):
    """
    Rejection sampling from N(center, L L') restricted to the open box
    (-upper, upper).

    :return: Tuple (draw, number of trials).
    """
    for trial in range(1, max_trials + 1):
        value = center + chol @ rng.standard_normal(center.size)
        if np.all(np.abs(value) < upper):
            return value, trial
    raise NumericalError("No proposal inside the hypercuboid after {} trials".format(max_trials))


def box_log_mass(center, cov, upper):
    """
    :return: log P(N(center, cov) in (-upper, upper)).
    """
    if center.size == 1 or np.count_nonzero(cov - np.diag(np.diag(cov))) == 0:
        sd = np.sqrt(np.diag(cov))
        return float(np.sum(trunc_normal_log_mass(center, sd, -upper, upper)))
    mvn = stats.multivariate_normal(mean=center, cov=cov, seed=BOX_MASS_SEED)
    return float(np.log(mvn.cdf(upper, lower_limit=-upper)))


def log_ratio_memory(state, prior, xi, cov):
    """
    :return: (log acceptance ratio of varpi -> xi including the ratio of the
             hypercuboid normalisers, proposed memory, context, log-likelihood).
    """
    p, q = state.model
    upper = ReparamMemory.bounds(p, q)
    memory = xi.to_memory()
    ctx = state.ctx.with_memory(memory)
    ll = state.evaluate(ctx=ctx)
    log_a = (ll - state.loglik + prior.log_memory(xi) - prior.log_memory(state.reparam)
             + box_log_mass(state.reparam.as_vector(), cov, upper) - box_log_mass(xi.as_vector(), cov, upper))
    return log_a, memory, ctx, ll


def joint_update_memory(state, tuning, prior=None, Sigma=None):
    """
    Simultaneous update of the whole r = p+q+1 dimensional varpi with a
    hypercuboid-truncated Gaussian random walk.

    :param state: :class:`ChainState`.
    :param tuning: :class:`TuningSpec`.
    :param prior: :class:`PriorSpec` (default: uniform priors).
    :param Sigma: Proposal covariance; defaults to ``tuning.covariance_for(p, q)``.
    :return: The updated state.
    """
    prior = PriorSpec() if prior is None else prior
    p, q = state.model
    cov = tuning.covariance_for(p, q) if Sigma is None else Sigma
    if cov.shape != (p + q + 1, p + q + 1):
        raise ConfigError("Proposal covariance of shape {} for a model with r = {}".format(cov.shape, p + q + 1))
    chol = np.linalg.cholesky(cov)
    vector, _ = sample_trunc_mvn(state.reparam.as_vector(), chol, ReparamMemory.bounds(p, q), state.rng)
    xi = ReparamMemory.from_vector(vector, p, q)
    log_a, memory, ctx, ll = log_ratio_memory(state, prior, xi, cov)
    accepted = _accept(state, log_a)
    if accepted:
        state.set_memory(xi, memory, ctx, ll)
    state.record("memory", accepted)
    return state


def backward_projection(state):
    """
    Proposal for x_A: the observed series is relabelled backwards in time
    (y_{-i} = x_{i+1}) and P values are simulated forward from the truncated
    AR representation with the current parameters. The first simulated value
    becomes x_A[0], the one adjacent to x_1.

    :return: Tuple (proposed x_A, its log proposal density).
    """
    aug, ctx, psi = state.aug, state.ctx, state.psi
    P, pi = aug.P, ctx.pi
    inn = psi.innovation
    history = aug.x[:P]
    buffer = np.concatenate((history[::-1], np.zeros(P)))
    if inn.is_gaussian:
        eps = state.rng.standard_normal(P)
    else:
        eps = state.rng.standard_t(inn.shape, P)
    level = ctx.Pi_P * psi.mu
    for t in range(P):
        idx = P + t
        buffer[idx] = inn.sigma * eps[t] + level - pi[1:] @ buffer[idx - 1::-1][:P]
    proposal = buffer[P:].copy()
    return proposal, proposal_log_density(state, proposal)


def proposal_log_density(state, x_A):
    """
    :return: Log density of ``x_A`` under the backward projection proposal.
    """
    aug = state.aug
    pseudo = AugmentedSeries(x_A, aug.x[:aug.P])
    return approx_loglik(pseudo, state.psi, pi=state.ctx.pi)


def update_xA(state):
    """
    Independence Metropolis-Hastings update of the pre-sample x_A under a flat
    prior, with the backward projection as proposal.
    """
    if state.ctx.mode != "approx":
        raise UnsupportedOperationError("x_A only exists for the approximate likelihood")
    proposal, log_q_new = backward_projection(state)
    ctx = state.ctx.with_aug(state.aug.with_xA(proposal))
    ll = state.evaluate(ctx=ctx)
    log_a = ll - state.loglik + proposal_log_density(state, state.aug.x_A) - log_q_new
    accepted = _accept(state, log_a)
    if accepted:
        state.aug = ctx.aug
        state.ctx = ctx
        state.loglik = ll
    state.record("x_A", accepted)
    return state


class SampleMatrix:
    """
    Retained draws of a chain, one row per recorded iteration.

    :param columns: Column names.
    :param values: Array of shape (draws, len(columns)).
    :param acceptance: Acceptance rate per kernel.
    :param logbook: ``deap.tools.Logbook`` with the block statistics.
    :param meta: Free-form run information (model bounds, seed, ...).
    """
    def __init__(self, columns, values, acceptance=None, logbook=None, meta=None):
        self.columns = list(columns)
        self.values = np.asarray(values, dtype=float).reshape(-1, len(self.columns))
        self.acceptance = dict(acceptance or {})
        self.logbook = logbook
        self.meta = dict(meta or {})

    def __getitem__(self, name):
        return self.values[:, self.columns.index(name)]

    def __contains__(self, name):
        return name in self.columns

    def __len__(self):
        return self.values.shape[0]

    def parameters(self):
        """
        :return: Names of the sampled quantities (every column but bookkeeping ones).
        """
        return [c for c in self.columns if c not in ("iter", "p", "q")]


class Sampler:
    """
    Driver of a fixed-model chain. As with any chain here, the steps are:
    1.- Initialize this class with the data, model, priors and tuning.
    2.- Call run().

    :param series: Observed series.
    :param model: Tuple (p, q) of the ARFIMA model.
    :param priors: :class:`PriorSpec`.
    :param tuning: :class:`TuningSpec`.
    :param likelihood: 'approx' or 'exact'.
    :param innovation: :class:`InnovationSpec` giving family and shape (its
                       sigma is ignored; the chain starts at the sample sd).
    :param iters: Total number of iterations, burn-in included.
    :param burnin: Discarded initial iterations.
    :param thin: Keep one of every ``thin`` iterations after burn-in.
    :param seed: Master seed.
    :param chain: Index of the chain (selects the random sub-stream).
    :param d0: Starting value of d.
    :param prior_only: Ignore the likelihood (prior sampling).
    :param truncation: Truncation order P of the approximate likelihood (default n).
    :param verbose: Log the block statistics while running.
    :param log_every: Size of the blocks summarised in the logbook.
    """
    def __init__(self, series, model=(0, 0), priors=None, tuning=None, likelihood="approx",
                 innovation=None, iters=10000, burnin=1000, thin=1, seed=0, chain=0, d0=0.0,
                 prior_only=False, truncation=None, verbose=False, log_every=1000):
        self.x = np.asarray(series, dtype=float)
        if self.x.ndim != 1 or self.x.size < 2:
            raise DataError("At least two observations are required")
        if likelihood not in MODES:
            raise ConfigError("Unknown likelihood {!r}; use one of {}".format(likelihood, MODES))
        self.model = tuple(int(v) for v in model)
        if min(self.model) < 0:
            raise ConfigError("Model orders must be non-negative, got {}".format(self.model))
        if likelihood == "exact" and any(self.model):
            raise ConfigError("The exact likelihood is only available for FI(d) models")
        if not abs(d0) < 0.5:
            raise ConfigError("Starting value d0 = {} is outside (-1/2, 1/2)".format(d0))

        self.priors = (priors if priors is not None else PriorSpec()).validate()
        self.tuning = (tuning if tuning is not None else TuningSpec()).resolve(self.x)
        self.likelihood = likelihood
        self.innovation = innovation if innovation is not None else InnovationSpec()
        self.iters = int(iters)
        self.burnin = int(burnin)
        self.thin = int(thin)
        self.retained = retained_indices(self.iters, self.burnin, self.thin)
        self.seed = seed
        self.chain = chain
        self.prior_only = prior_only
        self.verbose = verbose
        self.log_every = max(int(log_every), 1)

        self.rng = make_rng(seed, "chain", chain)
        self.state = self.init_state(d0, truncation)
        self.use_gibbs = self.define_gibbs()
        if prior_only and not self.priors.proper:
            logger.warning("Prior-only chain with improper priors on mu or sigma: their draws wander")

        self.toolbox = base.Toolbox()
        self.initialize_toolbox()
        self.columns = self.define_columns()

    def init_state(self, d0, truncation):
        """
        Starting point: mu at the sample mean, sigma at the sample sd, d at
        ``d0``, PACF components uniform on (-1, 1), x_A at the sample mean.
        """
        scale = np.std(self.x, ddof=1)
        if not scale > 0:
            raise DataError("The series is constant")
        p, q = self.model
        reparam = ReparamMemory(d0, self.rng.uniform(-1, 1, p), self.rng.uniform(-1, 1, q))
        psi = ProcessParams(self.x.mean(), self.innovation.with_sigma(scale), reparam.to_memory())
        aug = AugmentedSeries(self.x, P=truncation)
        return ChainState(aug, psi, self.likelihood, self.rng, self.prior_only)

    def define_gibbs(self):
        if self.tuning.gibbs is None:
            return self.innovation.is_gaussian and not self.prior_only
        if self.tuning.gibbs and not self.innovation.is_gaussian:
            raise ConfigError("Gibbs updates require Gaussian innovations")
        return bool(self.tuning.gibbs)

    def initialize_toolbox(self):
        """
        Registers the kernels of one sweep in the DEAP toolbox.
        """
        if self.use_gibbs:
            self.toolbox.register("update_mu", gibbs_update_mu, prior=self.priors)
            self.toolbox.register("update_sigma", gibbs_update_sigma, prior=self.priors)
        else:
            self.toolbox.register("update_mu", mh_update_mu, tuning=self.tuning, prior=self.priors)
            self.toolbox.register("update_sigma", mh_update_sigma, tuning=self.tuning, prior=self.priors)
        self.register_memory_update()
        if self.tuning.xA_update_period and self.likelihood == "approx":
            self.toolbox.register("update_xA", update_xA)

    def register_memory_update(self):
        if self.model == (0, 0):
            self.toolbox.register("update_memory", mh_update_d, tuning=self.tuning, prior=self.priors)
        else:
            self.toolbox.register("update_memory", joint_update_memory, tuning=self.tuning, prior=self.priors,
                                  Sigma=self.tuning.covariance_for(*self.model))

    def define_columns(self):
        p, q = self.model
        return (["iter", "d", "mu", "sigma"] + ["varphi_{}".format(i + 1) for i in range(p)]
                + ["vartheta_{}".format(j + 1) for j in range(q)])

    def sweep(self, iteration):
        """
        One iteration: mu, sigma, memory and, periodically, x_A.
        """
        self.toolbox.update_mu(self.state)
        self.toolbox.update_sigma(self.state)
        self.toolbox.update_memory(self.state)
        if hasattr(self.toolbox, "update_xA") and (iteration + 1) % self.tuning.xA_update_period == 0:
            self.toolbox.update_xA(self.state)

    def current_row(self, iteration):
        s = self.state
        return [iteration, s.reparam.d, s.psi.mu, s.psi.sigma] + list(s.reparam.varphi) + list(s.reparam.vartheta)

    def run(self):
        """
        Runs the chain.

        :return: :class:`SampleMatrix` with the retained draws, the acceptance
                 rates and a logbook of block statistics.
        """
        stats_d = tools.Statistics(lambda row: row[self.columns.index("d")])
        stats_d.register("avg", np.mean)
        stats_d.register("std", np.std)
        logbook = tools.Logbook()
        logbook.header = ["iter", "avg", "std"] + sorted(self.kernel_names())

        rows = []
        block = []
        keep = set(self.retained.tolist())
        for it in range(self.iters):
            self.sweep(it)
            self.state.check()
            row = self.current_row(it)
            block.append(row)
            if it in keep:
                rows.append(row)
            if (it + 1) % self.log_every == 0 or it + 1 == self.iters:
                logbook.record(iter=it + 1, **stats_d.compile(block), **self.state.acceptance_rates())
                block = []
                if self.verbose:
                    logger.info(logbook.stream)

        return SampleMatrix(self.columns, rows, self.state.acceptance_rates(), logbook, self.describe())

    def kernel_names(self):
        names = ["mu", "sigma", "d" if self.model == (0, 0) else "memory"]
        if hasattr(self.toolbox, "update_xA"):
            names.append("x_A")
        return names

    def describe(self):
        return {"model": list(self.model), "seed": self.seed, "chain": self.chain, "likelihood": self.likelihood,
                "gibbs": self.use_gibbs, "iters": self.iters, "burnin": self.burnin, "thin": self.thin,
                "truncation": self.state.aug.P, "prior_only": self.prior_only}


def run_chain(series, model=(0, 0), priors=None, tuning=None, iters=10000, burnin=1000, thin=1, seed=0,
              **kwargs):
    """
    Functional wrapper for :class:`Sampler`.

    :return: :class:`SampleMatrix`.
    """
    return Sampler(series, model, priors, tuning, iters=iters, burnin=burnin, thin=thin, seed=seed,
                   **kwargs).run()
