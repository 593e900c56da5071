"""
Posterior summaries, convergence diagnostics, multi-start runs and the
Monte Carlo studies over simulated FI(d) replicates.
"""
import logging
import multiprocessing
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from deap import base

from bayesarfima import metrics
from bayesarfima.auxiliary_functions import make_rng
from bayesarfima.errors import ArfimaError, ConfigError
from bayesarfima.estimators import METHODS, estimate_all
from bayesarfima.likelihood import MODES
from bayesarfima.samplers import START_POINTS, PriorSpec, SampleMatrix, run_chain
from bayesarfima.simulate import simulate_fid_exact

logger = logging.getLogger(__name__)

MIN_DRAWS = 100
MIN_REPLICATES = 10


@dataclass
class PosteriorSummary:
    """
    Per-parameter mean, sd, equal-tailed credible interval and effective
    sample size, plus the acceptance rates of the chain.
    """
    parameters: dict
    acceptance: dict = field(default_factory=dict)
    draws: int = 0

    def __getitem__(self, name):
        return self.parameters[name]

    def to_dict(self):
        return {"posterior": self.parameters, "acceptance": self.acceptance,
                "ess": {k: v["ess"] for k, v in self.parameters.items()}, "draws": self.draws}


def effective_sample_size(chain):
    """
    ESS of a single chain with the initial positive sequence estimator of the
    integrated autocorrelation time.

    :param chain: One dimensional array of draws.
    :return: ESS, never larger than the number of draws.
    """
    chain = np.asarray(chain, dtype=float)
    n = chain.size
    if n < 4:
        return float(n)
    centred = chain - chain.mean()
    var = np.mean(centred ** 2)
    if var == 0:
        return float(n)
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centred, size)
    acf = np.fft.irfft(spectrum * np.conjugate(spectrum), size)[:n] / (n * var)

    tau = -1.0
    for t in range(0, n - 1, 2):
        pair = acf[t] + acf[t + 1]
        if pair < 0:
            break
        tau += 2.0 * pair
    return float(min(n, n / max(tau, 1e-12)))


def rhat(chains):
    """
    Gelman-Rubin potential scale reduction factor.

    :param chains: Array of shape (chains, draws), at least two chains.
    :return: R-hat value.
    """
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2 or chains.shape[0] < 2 or chains.shape[1] < 2:
        raise ValueError("R-hat needs at least two chains of two draws")
    m, n = chains.shape
    between = n * np.var(chains.mean(axis=1), ddof=1)
    within = np.mean(np.var(chains, axis=1, ddof=1))
    if within == 0:
        return 1.0 if between == 0 else np.inf
    return float(np.sqrt(((n - 1) / n * within + between / n) / within))


def summarize(samples, parameters=None, level=0.95):
    """
    :param samples: :class:`SampleMatrix`.
    :param parameters: Columns to summarise (default: every sampled quantity).
    :param level: Probability of the equal-tailed credible interval.
    :return: :class:`PosteriorSummary`. Columns padded with NaN (reversible
             jump PACF components) are summarised over the iterations where
             they exist.
    """
    if len(samples) < MIN_DRAWS:
        raise ValueError("At least {} retained draws are required, got {}".format(MIN_DRAWS, len(samples)))
    tail = 100.0 * (1.0 - level) / 2.0
    table = {}
    for name in parameters or samples.parameters():
        values = samples[name]
        values = values[np.isfinite(values)]
        if values.size == 0:
            continue
        low, high = np.percentile(values, [tail, 100.0 - tail])
        table[name] = {"mean": float(values.mean()), "sd": float(values.std(ddof=1)) if values.size > 1 else 0.0,
                       "ci95": [float(low), float(high)], "ess": effective_sample_size(values),
                       "draws": int(values.size)}
    return PosteriorSummary(table, dict(samples.acceptance), len(samples))


@dataclass
class ModelProbTable:
    """
    Posterior model probabilities on the (P_max+1) x (Q_max+1) grid with the
    marginals of p (rows) and q (columns).
    """
    probabilities: np.ndarray

    @property
    def p_marginal(self):
        return self.probabilities.sum(axis=1)

    @property
    def q_marginal(self):
        return self.probabilities.sum(axis=0)

    def modal(self):
        p, q = np.unravel_index(np.argmax(self.probabilities), self.probabilities.shape)
        return (int(p), int(q)), float(self.probabilities[p, q])

    def to_dict(self):
        (p, q), prob = self.modal()
        return {"table": self.probabilities.tolist(), "p_marginal": self.p_marginal.tolist(),
                "q_marginal": self.q_marginal.tolist(), "modal": {"p": p, "q": q, "probability": prob}}


def model_table(samples, bounds=None):
    """
    Frequencies of the visited (p, q).

    :param samples: :class:`SampleMatrix` (fixed-model chains count as one model).
    :param bounds: Tuple (P_max, Q_max); read from the run when omitted.
    :return: :class:`ModelProbTable`.
    """
    if "p" in samples:
        p = samples["p"].astype(int)
        q = samples["q"].astype(int)
    else:
        fixed = samples.meta.get("model", (0, 0))
        p = np.full(len(samples), fixed[0])
        q = np.full(len(samples), fixed[1])
    if bounds is None:
        bounds = (samples.meta.get("P_max", int(p.max(initial=0))), samples.meta.get("Q_max", int(q.max(initial=0))))
    counts = np.zeros((bounds[0] + 1, bounds[1] + 1))
    np.add.at(counts, (p, q), 1.0)
    if counts.sum() == 0:
        raise ValueError("No draws to tabulate")
    return ModelProbTable(counts / counts.sum())


def _pool_toolbox(workers):
    toolbox = base.Toolbox()
    pool = None
    if workers > 1:
        pool = multiprocessing.Pool(workers)
        toolbox.register("map", pool.map)
    return toolbox, pool


def _chain_job(job):
    series, kwargs = job
    return run_chain(series, **kwargs)


def run_multistart(series, starts=START_POINTS, seed=0, workers=1, **kwargs):
    """
    Independent chains started at each d in ``starts``, chain i using the
    sub-stream ``("chain", i)`` of the seed.

    :param series: Observed series.
    :param starts: Starting values of d.
    :param seed: Master seed.
    :param workers: Processes used to run the chains.
    :param kwargs: Further :func:`run_chain` arguments (model, priors, tuning, iters, ...).
    :return: Tuple (list of SampleMatrix, pooled PosteriorSummary, R-hat per parameter).
    """
    jobs = [(series, dict(kwargs, seed=seed, chain=i, d0=d0)) for i, d0 in enumerate(starts)]
    toolbox, pool = _pool_toolbox(workers)
    try:
        runs = list(toolbox.map(_chain_job, jobs))
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    pooled = SampleMatrix(runs[0].columns, np.vstack([r.values for r in runs]),
                          _mean_acceptance(runs), meta=dict(runs[0].meta, chains=len(runs)))
    diag = {}
    if len(runs) > 1:
        length = min(len(r) for r in runs)
        for name in runs[0].parameters():
            diag[name] = rhat([r[name][:length] for r in runs])
    return runs, summarize(pooled), diag


def _mean_acceptance(runs):
    keys = sorted(set().union(*(r.acceptance for r in runs)))
    return {k: float(np.mean([r.acceptance.get(k, np.nan) for r in runs])) for k in keys}


@dataclass
class StudyConfig:
    """
    Monte Carlo study over simulated FI(d) series.

    :param replicates: Series per (n, d) cell (at least 10).
    :param n_grid: Series lengths.
    :param d_grid: True memory parameters d_I.
    :param likelihood: Likelihood used by the main fit.
    :param compare_exact: Also fit with the exact likelihood and report the shift.
    :param estimators: Classical estimators to run on every series.
    :param alt_d_sd: If set, refit under a N(0, alt_d_sd^2) prior on d.
    """
    replicates: int = 20
    n_grid: list = field(default_factory=lambda: [1024])
    d_grid: list = field(default_factory=lambda: [0.0])
    mu: float = 0.0
    sigma: float = 1.0
    likelihood: str = "approx"
    compare_exact: bool = False
    estimators: list = field(default_factory=list)
    alt_d_sd: Optional[float] = None
    iters: int = 11000
    burnin: int = 1000
    thin: int = 1
    seed: int = 0
    workers: int = 1

    def validate(self):
        if self.replicates < MIN_REPLICATES:
            raise ConfigError("A study needs at least {} replicates, got {}".format(MIN_REPLICATES, self.replicates))
        if not self.n_grid or not self.d_grid:
            raise ConfigError("n_grid and d_grid must not be empty")
        if any(not abs(d) < 0.5 for d in self.d_grid):
            raise ConfigError("Every d in d_grid must lie in (-1/2, 1/2)")
        if any(n < 2 for n in self.n_grid):
            raise ConfigError("Every n in n_grid must be at least 2")
        if self.likelihood not in MODES:
            raise ConfigError("Unknown likelihood {!r}".format(self.likelihood))
        unknown = set(self.estimators) - set(METHODS)
        if unknown:
            raise ConfigError("Unknown estimators {}".format(sorted(unknown)))
        if self.alt_d_sd is not None and not self.alt_d_sd > 0:
            raise ConfigError("alt_d_sd must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        return self

    def jobs(self):
        index = 0
        for n in self.n_grid:
            for d in self.d_grid:
                for rep in range(self.replicates):
                    yield {"index": index, "n": int(n), "d": float(d), "replicate": rep}
                    index += 1


def _fit_d(series, config, seed, **kwargs):
    samples = run_chain(series, iters=config.iters, burnin=config.burnin, thin=config.thin, seed=seed, **kwargs)
    return summarize(samples, ["d", "mu", "sigma"])


def run_replicate(job, config):
    """
    Simulates one series and fits it.

    :return: Flat record of the replicate; failures are kept as an "error" entry.
    """
    record = dict(job)
    seed = int(make_rng(config.seed, "replicate", job["index"]).integers(2 ** 62))
    record["seed"] = seed
    try:
        series = simulate_fid_exact(job["n"], job["d"], config.mu, config.sigma, seed)
        summary = _fit_d(series, config, seed, likelihood=config.likelihood)
        for name in ("d", "mu", "sigma"):
            record["{}_mean".format(name)] = summary[name]["mean"]
            record["{}_sd".format(name)] = summary[name]["sd"]
        record["d_lower"], record["d_upper"] = summary["d"]["ci95"]
        record["accept_d"] = summary.acceptance.get("d", np.nan)
        if config.compare_exact:
            other = "exact" if config.likelihood == "approx" else "approx"
            record["d_mean_{}".format(other)] = _fit_d(series, config, seed, likelihood=other)["d"]["mean"]
        if config.alt_d_sd is not None:
            priors = PriorSpec(d="gaussian", d_sd=config.alt_d_sd)
            record["d_mean_alt_prior"] = _fit_d(series, config, seed, likelihood=config.likelihood,
                                                priors=priors)["d"]["mean"]
        if config.estimators:
            for method, result in estimate_all(series, config.estimators).items():
                record["{}_d_hat".format(method)] = result.get("d_hat", np.nan)
    except (ArfimaError, ValueError, ArithmeticError) as err:
        logger.warning("Replicate %d failed: %s", job["index"], err)
        record["error"] = "{}: {}".format(type(err).__name__, err)
    return record


def _replicate_job(args):
    return run_replicate(*args)


def _cell_report(records, config, d):
    ok = [r for r in records if "error" not in r]
    cell = {"replicates": len(records), "failed": len(records) - len(ok)}
    if not ok:
        return cell
    d_means = np.array([r["d_mean"] for r in ok])
    res = metrics.residuals(d_means, d)
    hits, fraction = metrics.coverage([r["d_lower"] for r in ok], [r["d_upper"] for r in ok], d)
    cell.update({
        "d_mean": float(d_means.mean()), "d_sd": float(np.mean([r["d_sd"] for r in ok])),
        # Interval endpoints are averaged over the replicates.
        "d_ci95": [float(np.mean([r["d_lower"] for r in ok])), float(np.mean([r["d_upper"] for r in ok]))],
        "mu_sd": float(np.mean([r["mu_sd"] for r in ok])), "sigma_mean": float(np.mean([r["sigma_mean"] for r in ok])),
        "residual_mean": float(res.mean()), "residual_sd": float(res.std(ddof=1)) if res.size > 1 else 0.0,
        "rmse": metrics.rmse(d_means, d), "coverage": hits, "coverage_fraction": fraction,
    })
    for key in sorted(k for k in ok[0] if k.startswith("d_mean_")):
        shift = np.array([r["d_mean"] - r[key] for r in ok])
        cell["shift_vs_" + key[len("d_mean_"):]] = {"mean": float(shift.mean()), "max_abs": float(np.abs(shift).max())}
    for method in config.estimators:
        estimates = np.array([r.get("{}_d_hat".format(method), np.nan) for r in ok])
        estimates = estimates[np.isfinite(estimates)]
        if estimates.size:
            est_res = metrics.residuals(estimates, d)
            cell[method] = {"bias": float(est_res.mean()),
                            "sd": float(est_res.std(ddof=1)) if est_res.size > 1 else 0.0}
    return cell


def mc_study(config):
    """
    Runs every replicate of the study, in parallel when ``config.workers`` > 1.

    :param config: :class:`StudyConfig`.
    :return: Dictionary with the per-replicate records, per-cell summaries
             (residuals, coverage, averaged intervals, estimator comparison) and
             the regression slopes of posterior sds on n and on d_I.
    """
    config.validate()
    jobs = [(job, config) for job in config.jobs()]
    toolbox, pool = _pool_toolbox(config.workers)
    try:
        records = list(toolbox.map(_replicate_job, jobs))
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    cells = []
    for n in config.n_grid:
        for d in config.d_grid:
            group = [r for r in records if r["n"] == n and r["d"] == d]
            cells.append(dict(n=int(n), d=float(d), **_cell_report(group, config, d)))
    return {"config": asdict(config), "cells": cells, "slopes": study_slopes(cells, config),
            "replicates": records}


def study_slopes(cells, config):
    """
    log posterior sd of d against log n (for each d_I), and log posterior sd
    of mu against d_I (for each n, with log n as reference).
    """
    slopes = {}
    if len(config.n_grid) > 1:
        for d in config.d_grid:
            group = [c for c in cells if c["d"] == d and "d_sd" in c]
            if len(group) > 1:
                slope, stderr = metrics.loglog_slope([c["n"] for c in group], [c["d_sd"] for c in group])
                slopes["d_sd_vs_n(d={})".format(d)] = {"slope": slope, "stderr": stderr}
    if len(config.d_grid) > 1:
        for n in config.n_grid:
            group = [c for c in cells if c["n"] == n and "mu_sd" in c]
            if len(group) > 1:
                slope, stderr = metrics.semilog_slope([c["d"] for c in group], [c["mu_sd"] for c in group])
                slopes["mu_sd_vs_d(n={})".format(n)] = {"slope": slope, "stderr": stderr,
                                                        "reference": float(np.log(n))}
    return slopes
