"""
Reversible jump over the ARFIMA orders (p, q). Models live on the bounded
grid {0..P_max} x {0..Q_max}; jumps are births and deaths of the last PACF
coordinate of the AR or MA part, dimension-matched with u ~ U(-1, 1).
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from bayesarfima.errors import ConfigError
from bayesarfima.process import ReparamMemory
from bayesarfima.samplers import PriorSpec, Sampler, TuningSpec, check_covariance, joint_update_memory

logger = logging.getLogger(__name__)

MOVES = ("birth_ar", "death_ar", "birth_ma", "death_ma")
OPTIMAL_SCALE = 2.38 ** 2
LOG_U_DENSITY = -np.log(2.0)


@dataclass(frozen=True)
class ModelIndex:
    p: int = 0
    q: int = 0

    def within(self, P_max, Q_max):
        return 0 <= self.p <= P_max and 0 <= self.q <= Q_max

    @property
    def r(self):
        return self.p + self.q + 1

    def __iter__(self):
        return iter((self.p, self.q))


@dataclass
class ModelPrior:
    """
    Truncated joint Poisson prior p(p, q) proportional to lam^(p+q) / (p! q!)
    on {0..P_max} x {0..Q_max}.
    """
    lam: float = 1.0
    P_max: int = 5
    Q_max: int = 5

    def validate(self):
        if not self.lam > 0:
            raise ConfigError("The Poisson parameter must be positive, got {}".format(self.lam))
        if self.P_max < 0 or self.Q_max < 0:
            raise ConfigError("P_max and Q_max must be non-negative")
        return self

    @property
    def bounds(self):
        return self.P_max, self.Q_max

    def grid(self):
        return [ModelIndex(p, q) for p in range(self.P_max + 1) for q in range(self.Q_max + 1)]

    def log_normaliser(self):
        p = np.arange(self.P_max + 1)
        q = np.arange(self.Q_max + 1)
        table = (np.add.outer(p, q) * np.log(self.lam)
                 - np.add.outer(gammaln(p + 1.0), gammaln(q + 1.0)))
        return logsumexp(table)

    def masses(self):
        """
        :return: (P_max+1) x (Q_max+1) array of prior model probabilities.
        """
        table = np.zeros((self.P_max + 1, self.Q_max + 1))
        for m in self.grid():
            table[m.p, m.q] = np.exp(model_prior_logmass(m, self))
        return table


def model_prior_logmass(m, prior):
    """
    :param m: :class:`ModelIndex`.
    :param prior: :class:`ModelPrior`.
    :return: log p(m), -inf outside the grid.
    """
    if not m.within(prior.P_max, prior.Q_max):
        return -np.inf
    return ((m.p + m.q) * np.log(prior.lam) - gammaln(m.p + 1.0) - gammaln(m.q + 1.0)
            - prior.log_normaliser())


def available_moves(m, bounds):
    """
    :return: Names of the jumps leaving ``m`` that stay inside the grid.
    """
    P_max, Q_max = bounds
    moves = []
    if m.p < P_max:
        moves.append("birth_ar")
    if m.p > 0:
        moves.append("death_ar")
    if m.q < Q_max:
        moves.append("birth_ma")
    if m.q > 0:
        moves.append("death_ma")
    return moves


def move_target(m, move):
    step = 1 if move.startswith("birth") else -1
    if move.endswith("ar"):
        return ModelIndex(m.p + step, m.q)
    return ModelIndex(m.p, m.q + step)


def neighbors(m, bounds):
    """
    :param m: :class:`ModelIndex` inside the grid.
    :param bounds: Tuple (P_max, Q_max).
    :return: List of (ModelIndex, probability), uniform over the grid
             neighbours at L1 distance one.
    """
    if not m.within(*bounds):
        raise ValueError("Model {} is outside the grid {}".format(tuple(m), bounds))
    moves = available_moves(m, bounds)
    return [(move_target(m, move), 1.0 / len(moves)) for move in moves]


class ModelMove:
    """
    Birth and death moves on the PACF vector of a model. A birth appends u to
    varphi (AR) or vartheta (MA); a death drops the last entry, which is
    returned as the u that would recreate it.

    :param reparam: Current :class:`ReparamMemory`.
    :param bounds: Tuple (P_max, Q_max).
    """
    def __init__(self, reparam, bounds):
        self.reparam = reparam
        self.bounds = bounds
        self.model = ModelIndex(reparam.p, reparam.q)

    def methods(self):
        """
        :return: List with the moves that can be applied to the current model.
        """
        return available_moves(self.model, self.bounds)

    def apply_move(self, move, u=None):
        """
        :param move: One of :meth:`methods`.
        :param u: Value appended by a birth (ignored by deaths).
        :return: Tuple (new ReparamMemory, u).
        """
        if move not in self.methods():
            raise ValueError("The move {} is not available from model {}".format(move, tuple(self.model)))
        if move.startswith("birth"):
            if u is None or not abs(u) < 1:
                raise ValueError("A birth needs u in (-1, 1), got {}".format(u))
            return getattr(self, move)(u), u
        return getattr(self, move)()

    def birth_ar(self, u):
        r = self.reparam
        return ReparamMemory(r.d, np.append(r.varphi, u), r.vartheta)

    def death_ar(self):
        r = self.reparam
        return ReparamMemory(r.d, r.varphi[:-1], r.vartheta), r.varphi[-1]

    def birth_ma(self, u):
        r = self.reparam
        return ReparamMemory(r.d, r.varphi, np.append(r.vartheta, u))

    def death_ma(self):
        r = self.reparam
        return ReparamMemory(r.d, r.varphi, r.vartheta[:-1]), r.vartheta[-1]


def rj_step(state, priors=None, tuning=None, rng=None, model_prior=None):
    """
    One birth/death attempt. mu, sigma, d and the untouched PACF vector are
    carried over; the Jacobian of the dimension matching is one.

    :param state: :class:`ChainState` (approximate likelihood).
    :param priors: :class:`PriorSpec`.
    :param tuning: Unused; accepted so every kernel shares a signature.
    :param rng: Random generator (default: the chain's own).
    :param model_prior: :class:`ModelPrior`.
    :return: The updated state.
    """
    priors = PriorSpec() if priors is None else priors
    model_prior = ModelPrior() if model_prior is None else model_prior
    rng = state.rng if rng is None else rng
    bounds = model_prior.bounds

    mover = ModelMove(state.reparam, bounds)
    moves = mover.methods()
    if not moves:
        return state
    move = moves[rng.integers(len(moves))]
    birth = move.startswith("birth")
    u = rng.uniform(-1.0, 1.0) if birth else None
    proposal, u = mover.apply_move(move, u)

    current, target = mover.model, ModelIndex(proposal.p, proposal.q)
    forward = 1.0 / len(moves)
    backward = 1.0 / len(available_moves(target, bounds))
    memory = proposal.to_memory()
    ctx = state.ctx.with_memory(memory)
    ll = state.evaluate(ctx=ctx)
    log_a = (ll - state.loglik
             + model_prior_logmass(target, model_prior) - model_prior_logmass(current, model_prior)
             + priors.log_memory(proposal) - priors.log_memory(state.reparam)
             + np.log(backward) - np.log(forward)
             + (-LOG_U_DENSITY if birth else LOG_U_DENSITY))
    accepted = np.log(rng.uniform()) < log_a
    if accepted:
        state.set_memory(proposal, memory, ctx, ll)
    state.record("jump", accepted)
    return state


@dataclass
class ProposalCov:
    """
    Blocks of the within-model proposal covariance: a 3 x 3 matrix over
    (d, varphi_1, vartheta_1) and the variances of the remaining AR and MA
    PACF components.
    """
    Sigma11: np.ndarray = field(default_factory=lambda: np.diag([0.05 ** 2] * 3))
    sigma2_varphi: float = 0.05 ** 2
    sigma2_vartheta: float = 0.05 ** 2

    def validate(self):
        self.Sigma11 = check_covariance(self.Sigma11)
        if self.Sigma11.shape != (3, 3):
            raise ConfigError("Sigma11 must be 3 x 3, got {}".format(self.Sigma11.shape))
        if not (self.sigma2_varphi > 0 and self.sigma2_vartheta > 0):
            raise ConfigError("PACF proposal variances must be positive")
        return self

    @classmethod
    def diagonal(cls, sigma_d=0.05, sigma_pacf=0.05):
        return cls(np.diag([sigma_d ** 2, sigma_pacf ** 2, sigma_pacf ** 2]), sigma_pacf ** 2, sigma_pacf ** 2)


def build_proposal_cov(m, pc):
    """
    Assembles the r x r covariance of model (p, q): Sigma11 entries in the
    (d, varphi_1, vartheta_1) positions, diagonal blocks for varphi_2..p and
    vartheta_2..q, zeros elsewhere.

    :param m: :class:`ModelIndex`.
    :param pc: :class:`ProposalCov`.
    :return: Positive definite array of shape (r, r).
    :raises ConfigError: If the result is not positive definite.
    """
    p, q = m
    cov = np.zeros((m.r, m.r))
    # Positions of (d, varphi_1, vartheta_1) inside the model vector.
    where = [0] + ([1] if p else []) + ([p + 1] if q else [])
    which = [0] + ([1] if p else []) + ([2] if q else [])
    cov[np.ix_(where, where)] = np.asarray(pc.Sigma11, dtype=float)[np.ix_(which, which)]
    for i in range(2, p + 1):
        cov[i, i] = pc.sigma2_varphi
    for j in range(p + 2, p + q + 1):
        cov[j, j] = pc.sigma2_vartheta
    return check_covariance(cov)


@dataclass
class PilotConfig:
    """
    Fixed-model pilot run used to estimate Sigma11. Proposals are independent
    across coordinates with scale ``sigma``.
    """
    iters: int = 5000
    burnin: int = 1000
    sigma: float = 0.05
    jitter: float = 1e-8
    stream: str = "pilot"

    def validate(self):
        if self.iters <= self.burnin or self.burnin < 0:
            raise ConfigError("The pilot needs iters > burnin >= 0")
        if not self.sigma > 0:
            raise ConfigError("The pilot proposal scale must be positive")
        return self


def _is_pd(matrix):
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


def pilot_tune(series, m=ModelIndex(1, 1), config=None, seed=0, priors=None, **kwargs):
    """
    Runs a pilot chain of model ``m`` and rescales the sample covariance of
    (d, varphi_1, vartheta_1) by 2.38^2 / r.

    :param series: Observed series (n >= 128).
    :param m: :class:`ModelIndex` of the pilot model.
    :param config: :class:`PilotConfig`.
    :param seed: Master seed.
    :param priors: :class:`PriorSpec`.
    :param kwargs: Passed on to :class:`Sampler` (likelihood, innovation, ...).
    :return: :class:`ProposalCov`.
    """
    config = (config if config is not None else PilotConfig()).validate()
    if len(series) < 128:
        raise ValueError("The pilot chain needs at least 128 observations, got {}".format(len(series)))
    m = ModelIndex(*m)
    tuning = TuningSpec(sigma_d=config.sigma, sigma_pacf=config.sigma)
    draws = Sampler(series, tuple(m), priors, tuning, iters=config.iters, burnin=config.burnin,
                    seed=seed, chain=config.stream, **kwargs).run()

    names = ["d"] + (["varphi_1"] if m.p else []) + (["vartheta_1"] if m.q else [])
    block = np.atleast_2d(np.cov(np.column_stack([draws[c] for c in names]), rowvar=False))
    block = OPTIMAL_SCALE / m.r * block + config.jitter * np.eye(len(names))
    if not (np.all(np.isfinite(block)) and _is_pd(block)):
        logger.warning("Degenerate pilot covariance, falling back to its diagonal")
        variances = np.diag(block)
        if not np.all(np.isfinite(variances) & (variances > 0)):
            variances = np.full(len(names), config.sigma ** 2)
        block = np.diag(variances)

    default = config.sigma ** 2
    Sigma11 = np.diag([default] * 3)
    which = [0] + ([1] if m.p else []) + ([2] if m.q else [])
    Sigma11[np.ix_(which, which)] = block

    def tail_variance(prefix, order):
        if order < 2:
            return default
        return float(OPTIMAL_SCALE / m.r * np.mean([np.var(draws["{}_{}".format(prefix, i)], ddof=1)
                                                     for i in range(2, order + 1)])) or default

    pc = ProposalCov(Sigma11, tail_variance("varphi", m.p), tail_variance("vartheta", m.q))
    logger.info("Pilot covariance of model %s: %s", tuple(m), np.array2string(Sigma11, precision=5))
    return pc.validate()


class RJSampler(Sampler):
    """
    Transdimensional chain: each iteration runs the within-model sweep of
    :class:`Sampler` and then one birth/death attempt.

    :param series: Observed series.
    :param priors: :class:`PriorSpec`.
    :param tuning: :class:`TuningSpec` for mu and sigma.
    :param model_prior: :class:`ModelPrior` (grid bounds and lambda).
    :param proposal: :class:`ProposalCov` for the within-model memory update.
    :param start: Starting model (default (0, 0)).
    :param jumps_per_iter: Birth/death attempts after each sweep.
    :param kwargs: Remaining :class:`Sampler` arguments.
    """
    def __init__(self, series, priors=None, tuning=None, model_prior=None, proposal=None, start=(0, 0),
                 jumps_per_iter=1, **kwargs):
        self.model_prior = (model_prior if model_prior is not None else ModelPrior()).validate()
        tuning = tuning if tuning is not None else TuningSpec()
        self.proposal = (proposal if proposal is not None
                         else ProposalCov.diagonal(tuning.sigma_d, tuning.sigma_pacf)).validate()
        self.jumps_per_iter = int(jumps_per_iter)
        if not ModelIndex(*start).within(*self.model_prior.bounds):
            raise ConfigError("Starting model {} is outside the grid {}".format(tuple(start),
                                                                                self.model_prior.bounds))
        if kwargs.get("likelihood", "approx") != "approx":
            raise ConfigError("Reversible jump runs use the approximate likelihood")
        self._covariances = {}
        super().__init__(series, start, priors, tuning, **kwargs)

    def covariance(self, m):
        if m not in self._covariances:
            self._covariances[m] = build_proposal_cov(m, self.proposal)
        return self._covariances[m]

    def update_memory(self, state):
        return joint_update_memory(state, self.tuning, self.priors, self.covariance(ModelIndex(*state.model)))

    def register_memory_update(self):
        self.toolbox.register("update_memory", self.update_memory)
        self.toolbox.register("jump", rj_step, priors=self.priors, model_prior=self.model_prior)

    def define_columns(self):
        P_max, Q_max = self.model_prior.bounds
        return (["iter", "p", "q", "d", "mu", "sigma"] + ["varphi_{}".format(i + 1) for i in range(P_max)]
                + ["vartheta_{}".format(j + 1) for j in range(Q_max)])

    def sweep(self, iteration):
        super().sweep(iteration)
        for _ in range(self.jumps_per_iter):
            self.toolbox.jump(self.state)

    def current_row(self, iteration):
        P_max, Q_max = self.model_prior.bounds
        s = self.state
        varphi = np.full(P_max, np.nan)
        varphi[:s.reparam.p] = s.reparam.varphi
        vartheta = np.full(Q_max, np.nan)
        vartheta[:s.reparam.q] = s.reparam.vartheta
        return ([iteration, s.reparam.p, s.reparam.q, s.reparam.d, s.psi.mu, s.psi.sigma]
                + list(varphi) + list(vartheta))

    def kernel_names(self):
        return ["mu", "sigma", "memory", "jump"] + (["x_A"] if hasattr(self.toolbox, "update_xA") else [])

    def describe(self):
        meta = super().describe()
        meta.update({"rj": True, "start": meta.pop("model"), "P_max": self.model_prior.P_max,
                     "Q_max": self.model_prior.Q_max, "lambda": self.model_prior.lam})
        return meta


def run_rj_chain(series, priors=None, tuning=None, iters=10000, burnin=1000, thin=1, seed=0, **kwargs):
    """
    Functional wrapper for :class:`RJSampler`.

    :return: :class:`SampleMatrix` with p and q columns and NaN-padded PACF columns.
    """
    return RJSampler(series, priors, tuning, iters=iters, burnin=burnin, thin=thin, seed=seed, **kwargs).run()
