"""
Command line interface::

    bayesarfima simulate --n 1024 --d 0.25 --output x.csv
    bayesarfima fit --input x.csv --output fit.json --samples draws.csv
    bayesarfima rjfit --input x.csv --output rj.json --pmax 5 --qmax 5
    bayesarfima estimate --input x.csv
    bayesarfima mcstudy --replicates 20 --n-grid 1024 --d-grid 0 --workers 4

Options come from three layers: built-in defaults, an optional JSON file given
with ``--config`` and the flags on the command line, later layers winning.
"""
import argparse
import datetime
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from bayesarfima import __version__
from bayesarfima.data import read_config, read_series, write_json, write_records, write_samples, write_series
from bayesarfima.diagnostics import StudyConfig, mc_study, model_table, run_multistart, summarize
from bayesarfima.errors import ArfimaError, ConfigError, DataError
from bayesarfima.estimators import METHODS, estimate_all
from bayesarfima.process import InnovationSpec, MemoryParams
from bayesarfima.rjmcmc import ModelIndex, ModelPrior, PilotConfig, pilot_tune, run_rj_chain
from bayesarfima.samplers import START_POINTS, PriorSpec, SampleMatrix, TuningSpec
from bayesarfima.simulate import SimSpec, simulate_arfima

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

COMMON = {"seed": 0, "output": None, "log_level": "WARNING"}
CHAIN = {"input": None, "samples": None, "iters": 11000, "burnin": 1000, "thin": 1, "likelihood": "approx",
         "prior_only": False, "d_prior": "uniform", "d_prior_sd": 0.15, "innovation": "gaussian", "df": None,
         "xa_period": 0, "sigma_d": 0.05, "truncation": None, "workers": 1}
DEFAULTS = {
    "simulate": dict(COMMON, n=1024, d=0.0, mu=0.0, sigma=1.0, phi=[], theta=[], innovation="gaussian", df=None,
                     burnin=None, header=True),
    "fit": dict(COMMON, **CHAIN, model=[0, 0], chains=len(START_POINTS)),
    "rjfit": dict(COMMON, **CHAIN, pmax=5, qmax=5, lam=1.0, pilot=False, pilot_iters=5000),
    "estimate": dict(COMMON, input=None, methods=list(METHODS)),
    "mcstudy": dict(COMMON, replicates=20, n_grid=[1024], d_grid=[0.0], mu=0.0, sigma=1.0, likelihood="approx",
                    compare_exact=False, estimators=[], alt_d_sd=None, iters=11000, burnin=1000, thin=1,
                    workers=1, records=None),
}

# Types of the options whose default is None, and of the items of list options.
NULLABLE = {"output": str, "input": str, "samples": str, "records": str, "df": float, "truncation": int,
            "alt_d_sd": float, "burnin": int}
ITEMS = {"model": int, "phi": float, "theta": float, "n_grid": int, "d_grid": float, "methods": str,
         "estimators": str}


def _is_type(value, kind):
    if kind is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, kind)


def check_types(options, defaults):
    """
    :raises ConfigError: If an option does not have the type of its default,
                         e.g. a number given as a string in a JSON file.
    """
    for name, value in options.items():
        default = defaults[name]
        if default is None:
            if value is not None and not _is_type(value, NULLABLE[name]):
                raise ConfigError("{} must be {} or null, got {!r}".format(name, NULLABLE[name].__name__, value))
        elif isinstance(default, list):
            if not isinstance(value, list) or not all(_is_type(v, ITEMS[name]) for v in value):
                raise ConfigError("{} must be a list of {}, got {!r}".format(name, ITEMS[name].__name__, value))
        elif not _is_type(value, type(default)):
            raise ConfigError("{} must be {}, got {!r}".format(name, type(default).__name__, value))


@dataclass
class RunConfig:
    """
    Fully resolved options of one command.

    :param command: Sub-command name.
    :param options: Dictionary with every option of the command.
    """
    command: str
    options: dict = field(default_factory=dict)

    @classmethod
    def resolve(cls, command, file_options=None, flags=None):
        """
        :param command: Sub-command name.
        :param file_options: Options read from a JSON configuration; a
                             ``command`` entry, as written in every result,
                             must name this command.
        :param flags: Options given on the command line (None = not given).
        :return: A validated :class:`RunConfig`.
        :raises ConfigError: On unknown keys or invalid values.
        """
        file_options = dict(file_options or {})
        recorded = file_options.pop("command", command)
        if recorded != command:
            raise ConfigError("Configuration was written by {!r}, not {!r}".format(recorded, command))
        options = dict(DEFAULTS[command])
        for source in file_options, {k: v for k, v in (flags or {}).items() if v is not None}:
            unknown = sorted(set(source) - set(options))
            if unknown:
                raise ConfigError("Unknown option(s) for {}: {}".format(command, ", ".join(unknown)))
            options.update(source)
        return cls(command, options).validate()

    def __getattr__(self, name):
        if name == "options":
            raise AttributeError(name)
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name)

    def validate(self):
        o = self.options
        check_types(o, DEFAULTS[self.command])
        if o["seed"] < 0:
            raise ConfigError("seed must be non-negative")
        if self.command in ("fit", "rjfit"):
            if o["input"] is None:
                raise ConfigError("--input is required")
            if o["likelihood"] not in ("approx", "exact"):
                raise ConfigError("likelihood must be 'approx' or 'exact'")
            if o["iters"] <= o["burnin"] or o["burnin"] < 0 or o["thin"] < 1:
                raise ConfigError("Need iters > burnin >= 0 and thin >= 1")
            if o["innovation"] not in ("gaussian", "t"):
                raise ConfigError("innovation must be 'gaussian' or 't'")
            if o["d_prior"] not in ("uniform", "gaussian"):
                raise ConfigError("d_prior must be 'uniform' or 'gaussian'")
        if self.command == "fit":
            if len(o["model"]) != 2:
                raise ConfigError("model must be given as p,q")
            if o["chains"] < 1:
                raise ConfigError("chains must be at least 1")
        if self.command == "estimate":
            if o["input"] is None:
                raise ConfigError("--input is required")
            unknown = set(o["methods"]) - set(METHODS)
            if unknown:
                raise ConfigError("Unknown methods {}".format(sorted(unknown)))
        return self

    def to_dict(self):
        return {"command": self.command, **self.options}


def int_pair(text):
    try:
        p, q = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected p,q, got {!r}".format(text))
    return [p, q]


def float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated numbers, got {!r}".format(text))


def int_list(text):
    return [int(v) for v in float_list(text)]


def str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="bayesarfima", description="Bayesian inference for ARFIMA processes")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        sub.add_argument("--config", help="JSON file with option values")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--output", help="Output file ('-' or nothing for stdout)")
        sub.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        return sub

    def chain(sub):
        sub.add_argument("--input", help="CSV file with the series")
        sub.add_argument("--samples", help="CSV file for the retained draws")
        sub.add_argument("--iters", type=int)
        sub.add_argument("--burnin", type=int)
        sub.add_argument("--thin", type=int)
        sub.add_argument("--likelihood", choices=["approx", "exact"])
        sub.add_argument("--prior-only", dest="prior_only", action="store_true", default=None)
        sub.add_argument("--d-prior", dest="d_prior", choices=["uniform", "gaussian"])
        sub.add_argument("--d-prior-sd", dest="d_prior_sd", type=float)
        sub.add_argument("--innovation", choices=["gaussian", "t"])
        sub.add_argument("--df", type=float, help="Degrees of freedom of t innovations")
        sub.add_argument("--xa-period", dest="xa_period", type=int)
        sub.add_argument("--sigma-d", dest="sigma_d", type=float)
        sub.add_argument("--truncation", type=int)
        sub.add_argument("--workers", type=int)
        return sub

    sim = common(commands.add_parser("simulate", help="Simulate an ARFIMA series"))
    sim.add_argument("--n", type=int)
    sim.add_argument("--d", type=float)
    sim.add_argument("--mu", type=float)
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--phi", type=float_list, help="AR coefficients, e.g. 0.92")
    sim.add_argument("--theta", type=float_list, help="MA coefficients")
    sim.add_argument("--innovation", choices=["gaussian", "t"])
    sim.add_argument("--df", type=float)
    sim.add_argument("--burnin", type=int)
    sim.add_argument("--no-header", dest="header", action="store_false", default=None)

    fit = chain(common(commands.add_parser("fit", help="Fixed-model posterior sampling")))
    fit.add_argument("--model", type=int_pair, help="p,q")
    fit.add_argument("--chains", type=int, help="Chains started from spread values of d")
    fit.add_argument("--rj", action="store_true", help="Run the reversible jump sampler instead")
    for sub in (fit, chain(common(commands.add_parser("rjfit", help="Reversible jump over (p, q)")))):
        sub.add_argument("--pmax", type=int)
        sub.add_argument("--qmax", type=int)
        sub.add_argument("--lambda", dest="lam", type=float)
        sub.add_argument("--pilot", action="store_true", default=None)
        sub.add_argument("--pilot-iters", dest="pilot_iters", type=int)

    est = common(commands.add_parser("estimate", help="Classical estimators of d"))
    est.add_argument("--input")
    est.add_argument("--methods", type=str_list)

    study = common(commands.add_parser("mcstudy", help="Monte Carlo study on simulated FI(d) series"))
    study.add_argument("--replicates", type=int)
    study.add_argument("--n-grid", dest="n_grid", type=int_list)
    study.add_argument("--d-grid", dest="d_grid", type=float_list)
    study.add_argument("--mu", type=float)
    study.add_argument("--sigma", type=float)
    study.add_argument("--likelihood", choices=["approx", "exact"])
    study.add_argument("--compare-exact", dest="compare_exact", action="store_true", default=None)
    study.add_argument("--estimators", type=str_list)
    study.add_argument("--alt-d-sd", dest="alt_d_sd", type=float)
    study.add_argument("--iters", type=int)
    study.add_argument("--burnin", type=int)
    study.add_argument("--thin", type=int)
    study.add_argument("--workers", type=int)
    study.add_argument("--records", help="CSV file for the per-replicate records")
    return parser


def innovation_spec(config):
    if config.innovation == "t":
        return InnovationSpec("student_t", 1.0, config.df)
    return InnovationSpec()


def priors_from(config):
    return PriorSpec(d=config.d_prior, d_sd=config.d_prior_sd)


def result_header(config):
    return {"schema_version": SCHEMA_VERSION, "version": __version__, "seed": config.seed,
            "config": config.to_dict(), "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}


def chain_kwargs(config):
    return {"likelihood": config.likelihood, "innovation": innovation_spec(config), "prior_only": config.prior_only,
            "truncation": config.truncation, "verbose": logger.isEnabledFor(logging.INFO)}


def cmd_simulate(config):
    """
    Writes a simulated series as CSV, one value per line.
    """
    if config.innovation == "t":
        innovation = InnovationSpec("student_t", config.sigma, config.df)
    else:
        innovation = InnovationSpec("gaussian", config.sigma)
    spec = SimSpec(config.n, MemoryParams(config.d, config.phi, config.theta), config.mu, innovation, config.seed,
                   config.burnin)
    x = simulate_arfima(spec)
    if config.output in (None, "-"):
        if config.header:
            print("x")
        for value in x:
            print(repr(float(value)))
    else:
        write_series(config.output, x, config.header)
    return 0


def _start_points(chains):
    if chains <= len(START_POINTS):
        return START_POINTS[:chains] if chains > 1 else (0.0,)
    return tuple(np.linspace(-0.4, 0.4, chains))


def cmd_fit(config):
    """
    Fixed-model fit: JSON summary and optionally the retained draws as CSV.
    """
    x = read_series(config.input)
    tuning = TuningSpec(sigma_d=config.sigma_d, xA_update_period=config.xa_period)
    runs, summary, diag = run_multistart(x, _start_points(config.chains), seed=config.seed, workers=config.workers,
                                         model=tuple(config.model), priors=priors_from(config), tuning=tuning,
                                         iters=config.iters, burnin=config.burnin, thin=config.thin,
                                         **chain_kwargs(config))
    result = result_header(config)
    result.update(summary.to_dict())
    result["chains"] = len(runs)
    if diag:
        result["rhat"] = diag
    write_json(config.output, result)
    if config.samples:
        if len(runs) == 1:
            write_samples(config.samples, runs[0])
        else:
            stacked = np.vstack([np.column_stack((np.full(len(r), i), r.values)) for i, r in enumerate(runs)])
            write_samples(config.samples, SampleMatrix(["chain"] + runs[0].columns, stacked))
    return 0


def cmd_rjfit(config):
    """
    Reversible jump fit: JSON summary with the model probability table and
    optionally the draws with p and q columns.
    """
    x = read_series(config.input)
    model_prior = ModelPrior(config.lam, config.pmax, config.qmax)
    tuning = TuningSpec(sigma_d=config.sigma_d, xA_update_period=config.xa_period)
    proposal = None
    if config.pilot:
        pilot = PilotConfig(iters=config.pilot_iters, burnin=config.pilot_iters // 5)
        proposal = pilot_tune(x, ModelIndex(min(1, config.pmax), min(1, config.qmax)), pilot, seed=config.seed,
                              priors=priors_from(config), innovation=innovation_spec(config),
                              truncation=config.truncation)
    samples = run_rj_chain(x, priors_from(config), tuning, iters=config.iters, burnin=config.burnin,
                           thin=config.thin, seed=config.seed, model_prior=model_prior, proposal=proposal,
                           **chain_kwargs(config))
    result = result_header(config)
    result.update(summarize(samples).to_dict())
    result["model_probabilities"] = model_table(samples, model_prior.bounds).to_dict()
    result["prior_model_probabilities"] = model_prior.masses().tolist()
    if proposal is not None:
        result["proposal_sigma11"] = proposal.Sigma11.tolist()
    write_json(config.output, result)
    if config.samples:
        write_samples(config.samples, samples)
    return 0


def cmd_estimate(config):
    """
    Classical estimates of d; the exit status is non-zero only if every
    method failed.
    """
    x = read_series(config.input)
    report = estimate_all(x, config.methods)
    result = result_header(config)
    result["estimates"] = report
    write_json(config.output, result)
    if all("error" in entry for entry in report.values()):
        return DataError.exit_code
    return 0


def cmd_mcstudy(config):
    """
    Monte Carlo study: JSON report and optionally the per-replicate records.
    """
    study = StudyConfig(config.replicates, config.n_grid, config.d_grid, config.mu, config.sigma, config.likelihood,
                        config.compare_exact, config.estimators, config.alt_d_sd, config.iters, config.burnin,
                        config.thin, config.seed, config.workers)
    report = mc_study(study)
    result = result_header(config)
    result.update({"cells": report["cells"], "slopes": report["slopes"]})
    result["failed"] = sum(1 for r in report["replicates"] if "error" in r)
    write_json(config.output, result)
    if config.records:
        write_records(config.records, report["replicates"])
    return 0


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "rjfit": cmd_rjfit, "estimate": cmd_estimate,
            "mcstudy": cmd_mcstudy}


def main(argv=None):
    """
    :param argv: Arguments (default ``sys.argv[1:]``).
    :return: Exit status: 0 success, 2 configuration error, 3 data error,
             4 numerical failure.
    """
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    if command == "fit" and args.pop("rj"):
        command = "rjfit"
        args.pop("model", None)
        args.pop("chains", None)
    try:
        file_options = read_config(config_path) if config_path else None
        config = RunConfig.resolve(command, file_options, args)
        logging.basicConfig(level=config.log_level, stream=sys.stderr,
                            format="%(asctime)s %(name)s %(levelname)s: %(message)s")
        return COMMANDS[command](config)
    except ArfimaError as err:
        logger.error("%s", err)
        return err.exit_code
    except ValueError as err:
        logger.error("%s", err)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
