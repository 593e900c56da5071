"""
Synthetic ARFIMA(p, d, q) series. Gaussian FI(d) cores are drawn exactly
through the Durbin-Levinson recursion; non-Gaussian cores use the truncated
MA(inf) representation. The ARMA part is applied afterwards by filtering,
with a burn-in that is discarded.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve, lfilter

from bayesarfima.auxiliary_functions import make_rng
from bayesarfima.errors import DomainError
from bayesarfima.likelihood import levinson_recursion
from bayesarfima.process import InnovationSpec, MemoryParams, acv_fid, fi_psi_coeffs

logger = logging.getLogger(__name__)


@dataclass
class SimSpec:
    """
    :param n: Length of the series.
    :param memory: :class:`MemoryParams` (stationary and invertible).
    :param mu: Process mean.
    :param innovation: :class:`InnovationSpec`.
    :param seed: Master seed; the draws come from its "simulate" sub-stream.
    :param burnin: Discarded transient of the ARMA filter (default 10 max(p, q, 50)).
    """
    n: int = 1024
    memory: MemoryParams = field(default_factory=MemoryParams)
    mu: float = 0.0
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    seed: int = 0
    burnin: Optional[int] = None

    def validate(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("The series length must be a positive integer, got {}".format(self.n))
        if not abs(self.memory.d) < 0.5:
            raise DomainError("d = {} is outside (-1/2, 1/2)".format(self.memory.d))
        if not self.memory.is_valid():
            raise DomainError("Memory parameter is not stationary and invertible: {!r}".format(self.memory))
        if self.burnin is None:
            self.burnin = 10 * max(self.memory.p, self.memory.q, 50)
        if self.burnin < 0:
            raise ValueError("burnin must be non-negative")
        return self


def fid_core(n, d, sigma, rng):
    """
    Zero-mean Gaussian FI(d) path: X_t = sum_k phi_tk X_{t-k} + sqrt(v_t) Z_t
    with the Durbin-Levinson prediction coefficients of gamma_d.
    """
    gamma = acv_fid(d, n - 1, sigma)
    z = rng.standard_normal(n)
    x = np.empty(n)
    for t, (phi, v) in enumerate(levinson_recursion(gamma)):
        x[t] = np.sqrt(v) * z[t] + (phi @ x[t - 1::-1][:t] if t else 0.0)
    return x


def simulate_fid_exact(n, d, mu=0.0, sigma=1.0, seed=0):
    """
    Exact draw of a Gaussian FI(d) series in O(n^2).

    :param n: Length.
    :param d: Memory parameter in (-1/2, 1/2).
    :param mu: Mean.
    :param sigma: Innovation scale.
    :param seed: Master seed.
    :return: Array of length n.
    """
    if int(n) != n or n < 1:
        raise ValueError("The series length must be a positive integer, got {}".format(n))
    return fid_core(int(n), d, sigma, make_rng(seed, "simulate")) + mu


def ma_core(n, d, innovation, rng):
    """
    Truncated MA(inf) path with n + 1 coefficients: X_t = sum_k psi_k eps_{t-k}.
    """
    psi = fi_psi_coeffs(d, n)
    if innovation.is_gaussian:
        eps = rng.standard_normal(2 * n + 1)
    else:
        eps = rng.standard_t(innovation.shape, 2 * n + 1)
    return innovation.sigma * fftconvolve(eps, psi, mode="valid")[:n]


def simulate_arfima(spec):
    """
    :param spec: :class:`SimSpec`.
    :return: Array of length ``spec.n``. With p = q = 0 and Gaussian
             innovations it coincides with :func:`simulate_fid_exact` for the
             same seed.
    """
    spec.validate()
    memory, inn = spec.memory, spec.innovation
    rng = make_rng(spec.seed, "simulate")
    arma = bool(memory.p or memory.q)
    length = spec.n + (spec.burnin if arma else 0)
    if inn.is_gaussian:
        core = fid_core(length, memory.d, inn.sigma, rng)
    else:
        core = ma_core(length, memory.d, inn, rng)
    if arma:
        core = lfilter(np.concatenate(([1.0], memory.theta)), np.concatenate(([1.0], memory.phi)), core)
        core = core[spec.burnin:]
    logger.debug("Simulated %d values of %r", spec.n, memory)
    return core + spec.mu
