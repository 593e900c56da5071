"""
Definitions of the ARFIMA(p, d, q) process: coefficient expansions,
autocovariances, spectral densities, stationarity and the PACF bijection.

Polynomials follow the "+" sign convention throughout::

    Phi(z)   = 1 + phi_1 z + ... + phi_p z^p
    Theta(z) = 1 + theta_1 z + ... + theta_q z^q
    Phi(B) (1 - B)^d (X_t - mu) = Theta(B) eps_t

Most libraries (statsmodels included) write ``1 - sum(phi_k z^k)``; an AR(1)
with ``phi = (0.92,)`` here is ``X_t = -0.92 X_{t-1} + eps_t`` there.
"""
import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

from bayesarfima.errors import DomainError

FAMILIES = ("gaussian", "student_t")


class MemoryParams:
    """
    Full memory parameter omega = (phi, theta, d) of an ARFIMA process.

    :param d: Fractional integration (memory) parameter, in (-1/2, 1/2).
    :param phi: AR coefficients (length p >= 0) in the "+" convention.
    :param theta: MA coefficients (length q >= 0) in the "+" convention.
    """
    def __init__(self, d=0.0, phi=(), theta=()):
        self.d = float(d)
        self.phi = np.atleast_1d(np.asarray(phi, dtype=float)).copy()
        self.theta = np.atleast_1d(np.asarray(theta, dtype=float)).copy()
        if self.phi.ndim != 1 or self.theta.ndim != 1:
            raise ValueError("phi and theta must be one dimensional")

    @property
    def p(self):
        return self.phi.size

    @property
    def q(self):
        return self.theta.size

    def with_d(self, d):
        """
        :param d: New memory parameter.
        :return: A copy of the parameters with ``d`` replaced.
        """
        return MemoryParams(d, self.phi, self.theta)

    def is_valid(self):
        return is_stationary_invertible(self)

    def to_reparam(self):
        """
        :return: The equivalent :class:`ReparamMemory`.
        :raises DomainError: If phi or theta is outside the stationarity region.
        """
        if not abs(self.d) < 0.5:
            raise DomainError("d = {} is outside (-1/2, 1/2)".format(self.d))
        return ReparamMemory(self.d, monahan_to_pacf(self.phi), monahan_to_pacf(self.theta))

    def codify_components(self):
        return [("d", self.d), ("phi", self.phi), ("theta", self.theta)]

    def __str__(self):
        text = "ARFIMA({}, d, {}) memory:".format(self.p, self.q)
        for name, value in self.codify_components():
            text += "\n\t-{}: {}".format(name, np.array2string(np.asarray(value), precision=4))
        return text

    def __repr__(self):
        return "MemoryParams(d={!r}, phi={!r}, theta={!r})".format(self.d, self.phi.tolist(),
                                                                  self.theta.tolist())


class ReparamMemory:
    """
    Memory parameter in PACF coordinates, varpi = (d, varphi, vartheta), living
    in the hypercuboid (-1/2, 1/2) x (-1, 1)^(p+q).

    :param d: Memory parameter.
    :param varphi: PACF vector of the AR polynomial.
    :param vartheta: PACF vector of the MA polynomial.
    """
    def __init__(self, d=0.0, varphi=(), vartheta=()):
        self.d = float(d)
        self.varphi = np.atleast_1d(np.asarray(varphi, dtype=float)).copy()
        self.vartheta = np.atleast_1d(np.asarray(vartheta, dtype=float)).copy()

    @property
    def p(self):
        return self.varphi.size

    @property
    def q(self):
        return self.vartheta.size

    def inside(self):
        """
        :return: True if every coordinate lies strictly inside the hypercuboid.
        """
        return (abs(self.d) < 0.5 and bool(np.all(np.abs(self.varphi) < 1))
                and bool(np.all(np.abs(self.vartheta) < 1)))

    def to_memory(self):
        """
        :return: The equivalent :class:`MemoryParams`.
        """
        return MemoryParams(self.d, pacf_to_monahan(self.varphi), pacf_to_monahan(self.vartheta))

    def as_vector(self):
        """
        :return: Flat vector (d, varphi_1..varphi_p, vartheta_1..vartheta_q).
        """
        return np.concatenate(([self.d], self.varphi, self.vartheta))

    @classmethod
    def from_vector(cls, vector, p, q):
        """
        :param vector: Flat vector as returned by :meth:`as_vector`.
        :param p: Number of AR components.
        :param q: Number of MA components.
        :return: A new :class:`ReparamMemory`.
        """
        vector = np.asarray(vector, dtype=float)
        if vector.size != 1 + p + q:
            raise ValueError("Expected a vector of length {}, got {}".format(1 + p + q, vector.size))
        return cls(vector[0], vector[1:1 + p], vector[1 + p:])

    @staticmethod
    def bounds(p, q):
        """
        :return: Upper corner of the hypercuboid for a (p, q) model; the lower
                 corner is its negative.
        """
        return np.concatenate(([0.5], np.ones(p + q)))

    def __repr__(self):
        return "ReparamMemory(d={!r}, varphi={!r}, vartheta={!r})".format(
            self.d, self.varphi.tolist(), self.vartheta.tolist())


class InnovationSpec:
    """
    Location-scale family of the innovations. Student-t innovations are
    standardised to unit *scale* (not unit variance).

    :param family: 'gaussian' or 'student_t'.
    :param sigma: Scale parameter (> 0).
    :param shape: Degrees of freedom for 'student_t' (> 2); ignored otherwise.
    """
    def __init__(self, family="gaussian", sigma=1.0, shape=None):
        if family not in FAMILIES:
            raise ValueError("Unknown innovation family {!r}; use one of {}".format(family, FAMILIES))
        if not sigma > 0:
            raise DomainError("sigma must be positive, got {}".format(sigma))
        if family == "student_t":
            if shape is None or not float(shape) > 2:
                raise ValueError("Student-t innovations need degrees of freedom > 2, got {}".format(shape))
            shape = float(shape)
        else:
            shape = None
        self.family = family
        self.sigma = float(sigma)
        self.shape = shape

    @property
    def is_gaussian(self):
        return self.family == "gaussian"

    def with_sigma(self, sigma):
        return InnovationSpec(self.family, sigma, self.shape)

    def __repr__(self):
        return "InnovationSpec({!r}, sigma={!r}, shape={!r})".format(self.family, self.sigma, self.shape)


class ProcessParams:
    """
    Everything the likelihood needs: psi = (mu, innovation, memory).

    :param mu: Process mean.
    :param innovation: :class:`InnovationSpec` (carries sigma).
    :param memory: :class:`MemoryParams`.
    """
    def __init__(self, mu=0.0, innovation=None, memory=None):
        self.mu = float(mu)
        self.innovation = innovation if innovation is not None else InnovationSpec()
        self.memory = memory if memory is not None else MemoryParams()

    @property
    def sigma(self):
        return self.innovation.sigma

    def __repr__(self):
        return "ProcessParams(mu={!r}, innovation={!r}, memory={!r})".format(self.mu, self.innovation,
                                                                           self.memory)


def _check_truncation(P):
    if int(P) != P or P < 0:
        raise ValueError("Truncation order must be a non-negative integer, got {}".format(P))
    return int(P)


def fi_pi_coeffs(d, P):
    """
    AR(inf) weights of (1 - B)^d, computed with the ratio recurrence
    pi_k = pi_{k-1} (k - 1 - d) / k, pi_0 = 1.

    :param d: Memory parameter.
    :param P: Truncation order.
    :return: Array pi_0..pi_P.
    """
    P = _check_truncation(P)
    k = np.arange(1, P + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k - 1.0 - d) / k)))


def fi_psi_coeffs(d, P):
    """
    MA(inf) weights of (1 - B)^-d, i.e. ``fi_pi_coeffs(-d, P)``.
    """
    return fi_pi_coeffs(-d, P)


def _check_short_memory(memory):
    try:
        monahan_to_pacf(memory.phi)
    except DomainError:
        raise DomainError("AR polynomial {} is not stationary".format(memory.phi.tolist()))
    try:
        monahan_to_pacf(memory.theta)
    except DomainError:
        raise DomainError("MA polynomial {} is not invertible".format(memory.theta.tolist()))


def arfima_pi_coeffs(memory, P):
    """
    AR(inf) weights of Theta(z)^-1 Phi(z) (1 - z)^d truncated at order P.

    :param memory: :class:`MemoryParams` (stationary and invertible).
    :param P: Truncation order.
    :return: Array pi_0..pi_P.
    """
    P = _check_truncation(P)
    _check_short_memory(memory)
    coeffs = fi_pi_coeffs(memory.d, P)
    if memory.p:
        coeffs = np.convolve(coeffs, np.concatenate(([1.0], memory.phi)))[:P + 1]
    if memory.q:
        # Long division by Theta.
        coeffs = lfilter([1.0], np.concatenate(([1.0], memory.theta)), coeffs)
    return coeffs


def arfima_psi_coeffs(memory, P):
    """
    MA(inf) weights of Theta(z) / (Phi(z) (1 - z)^d) truncated at order P.

    :param memory: :class:`MemoryParams` (stationary and invertible).
    :param P: Truncation order.
    :return: Array psi_0..psi_P.
    """
    P = _check_truncation(P)
    _check_short_memory(memory)
    coeffs = fi_psi_coeffs(memory.d, P)
    if memory.q:
        coeffs = np.convolve(coeffs, np.concatenate(([1.0], memory.theta)))[:P + 1]
    if memory.p:
        coeffs = lfilter([1.0], np.concatenate(([1.0], memory.phi)), coeffs)
    return coeffs


def _check_d(d):
    if not abs(d) < 0.5:
        raise DomainError("d = {} is outside (-1/2, 1/2)".format(d))


def acv_fid(d, maxlag, sigma=1.0):
    """
    Autocovariance of FI(d) with innovation scale sigma. gamma(0) is evaluated
    in log space, the remaining lags by gamma(k) = gamma(k-1) (k-1+d) / (k-d).

    :param d: Memory parameter in (-1/2, 1/2).
    :param maxlag: Largest lag required.
    :param sigma: Innovation scale.
    :return: Array gamma(0)..gamma(maxlag).
    """
    _check_d(d)
    maxlag = _check_truncation(maxlag)
    gamma0 = sigma ** 2 * np.exp(gammaln(1.0 - 2.0 * d) - 2.0 * gammaln(1.0 - d))
    k = np.arange(1, maxlag + 1, dtype=float)
    return gamma0 * np.concatenate(([1.0], np.cumprod((k - 1.0 + d) / (k - d))))


def acf_fid(d, k):
    """
    :param d: Memory parameter in (-1/2, 1/2).
    :param k: Lag (non-negative integer).
    :return: rho_d(k) = gamma_d(k) / gamma_d(0).
    """
    _check_d(d)
    k = _check_truncation(abs(k))
    if k == 0:
        return 1.0
    j = np.arange(1, k + 1, dtype=float)
    return float(np.prod((j - 1.0 + d) / (j - d)))


def sdf_arfima(memory, sigma, freq):
    """
    Spectral density of ARFIMA(p, d, q)::

        f(l) = sigma^2 / (2 pi) |Theta(e^-il)|^2 / |Phi(e^-il)|^2 |1 - e^il|^(-2d)

    :param memory: :class:`MemoryParams`.
    :param sigma: Innovation scale.
    :param freq: Frequency, or array of frequencies, in [0, pi].
    :return: Spectral density value(s).
    """
    lam = np.asarray(freq, dtype=float)
    if np.any(lam < 0) or np.any(lam > np.pi):
        raise ValueError("Frequencies must lie in [0, pi]")
    if memory.d > 0 and np.any(lam == 0):
        raise DomainError("The spectral density is infinite at frequency 0 when d > 0")
    z = np.exp(-1j * lam)
    num = np.abs(np.polynomial.polynomial.polyval(z, np.concatenate(([1.0], memory.theta)))) ** 2
    den = np.abs(np.polynomial.polynomial.polyval(z, np.concatenate(([1.0], memory.phi)))) ** 2
    with np.errstate(divide="ignore"):
        frac = (2.0 * np.sin(lam / 2.0)) ** (-2.0 * memory.d)
    return sigma ** 2 / (2 * np.pi) * num / den * frac


def monahan_to_pacf(phi):
    """
    Maps polynomial coefficients in the stationarity region C_p to the
    partial autocorrelations in (-1, 1)^p by the step-down recursion::

        phi_i^(k-1) = (phi_i^(k) - phi_k^(k) phi_(k-i)^(k)) / (1 - (phi_k^(k))^2)

    reading varphi_k = phi_k^(k) off the diagonal.

    :param phi: Coefficient vector (length p, possibly 0).
    :return: PACF vector of the same length.
    :raises DomainError: If phi is not in the stationarity region.
    """
    current = np.atleast_1d(np.asarray(phi, dtype=float)).copy()
    p = current.size
    pacf = np.zeros(p)
    for k in range(p, 0, -1):
        last = current[k - 1]
        if not abs(last) < 1:
            raise DomainError("Coefficients {} are not in the stationarity region".format(
                np.asarray(phi).tolist()))
        pacf[k - 1] = last
        head = current[:k - 1]
        current = (head - last * head[::-1]) / (1.0 - last ** 2)
    return pacf


def pacf_to_monahan(varphi):
    """
    Inverse of :func:`monahan_to_pacf` (step-up recursion)::

        phi_i^(k) = phi_i^(k-1) + varphi_k phi_(k-i)^(k-1)

    :param varphi: PACF vector with every entry in (-1, 1).
    :return: Coefficient vector in C_p.
    """
    varphi = np.atleast_1d(np.asarray(varphi, dtype=float))
    if np.any(~(np.abs(varphi) < 1)):
        raise ValueError("Every partial autocorrelation must lie in (-1, 1), got {}".format(varphi.tolist()))
    current = np.zeros(0)
    for value in varphi:
        current = np.concatenate((current + value * current[::-1], [value]))
    return current


def is_stationary_invertible(memory):
    """
    :param memory: :class:`MemoryParams`.
    :return: True iff |d| < 1/2, phi is stationary and theta invertible.
    """
    if not abs(memory.d) < 0.5:
        return False
    try:
        monahan_to_pacf(memory.phi)
        monahan_to_pacf(memory.theta)
    except DomainError:
        return False
    return True
