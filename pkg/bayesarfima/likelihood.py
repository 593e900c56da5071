"""
Gaussian likelihood of FI(d) evaluated exactly with the Durbin-Levinson
recursion, and the conditional likelihood of ARFIMA(p, d, q) obtained by
truncating the AR(inf) representation at order P and conditioning on the
unobserved pre-sample x_A.
"""
import numpy as np
from scipy import stats

from bayesarfima.auxiliary_functions import next_pow_two
from bayesarfima.errors import DataError, DomainError, NumericalError, UnsupportedOperationError
from bayesarfima.process import FAMILIES, acv_fid, arfima_pi_coeffs

LOG_2PI = np.log(2.0 * np.pi)
MODES = ("approx", "exact")


class AugmentedSeries:
    """
    Observed series together with the auxiliary pre-sample.

    :param x: Observed series x_1..x_n.
    :param x_A: Pre-sample in time-reversed order (x_0, x_-1, ..., x_{1-P}).
                Defaults to the sample mean repeated P times.
    :param P: Truncation order, used when ``x_A`` is not given (default n).
    """
    def __init__(self, x, x_A=None, P=None):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise DataError("The series must be a non-empty vector")
        if not np.all(np.isfinite(x)):
            raise DataError("The series contains non-finite values")
        if x_A is None:
            P = x.size if P is None else int(P)
            x_A = np.full(P, x.mean())
        x_A = np.asarray(x_A, dtype=float)
        if x_A.ndim != 1 or not 1 <= x_A.size <= x.size:
            raise ValueError("The pre-sample length must be between 1 and n = {}, got {}".format(
                x.size, x_A.size))
        if not np.all(np.isfinite(x_A)):
            raise DataError("The pre-sample contains non-finite values")
        self.x = x
        self.x_A = x_A

    @property
    def n(self):
        return self.x.size

    @property
    def P(self):
        return self.x_A.size

    def chronological(self):
        """
        :return: (x_{1-P}, ..., x_0, x_1, ..., x_n) in time order.
        """
        return np.concatenate((self.x_A[::-1], self.x))

    def with_xA(self, x_A):
        return AugmentedSeries(self.x, x_A)

    def shifted(self, a):
        return AugmentedSeries(self.x + a, self.x_A + a)


def compute_c(aug, pi):
    """
    c_t = sum_{k=0}^{P} pi_k x_{t-k}, t = 1..n, as an FFT convolution of the
    augmented data with the coefficients.

    :param aug: :class:`AugmentedSeries`.
    :param pi: Coefficients pi_0..pi_P.
    :return: Vector c_1..c_n.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or pi.size != aug.P + 1:
        raise ValueError("Expected {} coefficients for truncation P = {}, got {}".format(
            aug.P + 1, aug.P, pi.size))
    size = next_pow_two(aug.n + aug.P + 1)
    conv = np.fft.irfft(np.fft.rfft(aug.chronological(), size) * np.fft.rfft(pi, size), size)
    return conv[aug.P:aug.P + aug.n]


def innovation_logpdf(z, family="gaussian", shape=None):
    """
    :param z: Standardised argument(s).
    :param family: 'gaussian' or 'student_t'.
    :param shape: Degrees of freedom (> 2) for 'student_t'.
    :return: log f(z; 0, 1, shape).
    """
    if family == "gaussian":
        return stats.norm.logpdf(z)
    if family == "student_t":
        if shape is None or not shape > 2:
            raise ValueError("Student-t innovations need degrees of freedom > 2, got {}".format(shape))
        return stats.t.logpdf(z, shape)
    raise ValueError("Unknown innovation family {!r}; use one of {}".format(family, FAMILIES))


def approx_loglik(aug, psi, pi=None):
    """
    Conditional log-likelihood given the pre-sample::

        -n log(sigma) + sum_t log f((c_t - Pi_P mu) / sigma; shape)

    :param aug: :class:`AugmentedSeries`.
    :param psi: :class:`ProcessParams`.
    :param pi: Optional cached coefficients for ``psi.memory`` at order ``aug.P``.
    :return: Log-likelihood value.
    """
    if not abs(psi.memory.d) < 0.5:
        raise DomainError("d = {} is outside (-1/2, 1/2)".format(psi.memory.d))
    if pi is None:
        pi = arfima_pi_coeffs(psi.memory, aug.P)
    c = compute_c(aug, pi)
    inn = psi.innovation
    z = (c - pi.sum() * psi.mu) / inn.sigma
    return -aug.n * np.log(inn.sigma) + np.sum(innovation_logpdf(z, inn.family, inn.shape))


def levinson_recursion(gamma):
    """
    Durbin-Levinson recursion on a Toeplitz autocovariance sequence.

    :param gamma: Autocovariances gamma(0)..gamma(n-1).
    :return: Generator yielding, for t = 0..n-1, the coefficients predicting
             X_t from (X_{t-1}, ..., X_0) and the prediction variance v_t.
    :raises NumericalError: If a prediction variance is not positive.
    """
    gamma = np.asarray(gamma, dtype=float)
    phi = np.zeros(0)
    v = gamma[0]
    if not v > 0:
        raise NumericalError("Autocovariance at lag 0 must be positive, got {}".format(v))
    yield phi, v
    for t in range(1, gamma.size):
        kappa = (gamma[t] - phi @ gamma[t - 1:0:-1]) / v
        phi = np.concatenate((phi - kappa * phi[::-1], [kappa]))
        v = v * (1.0 - kappa ** 2)
        if not v > 0:
            raise NumericalError("Durbin-Levinson prediction variance became {} at step {}".format(v, t))
        yield phi, v


def dl_innovations(gamma, y):
    """
    One-step prediction errors of one or several series under the covariance
    given by ``gamma``, never forming the n x n matrix.

    :param gamma: Autocovariances gamma(0)..gamma(n-1).
    :param y: Array of shape (n,) or (n, m).
    :return: Prediction variances (n,) and prediction errors shaped like ``y``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[0] != len(gamma):
        raise ValueError("Series length {} does not match the {} autocovariances".format(
            y.shape[0], len(gamma)))
    errors = np.empty_like(y)
    variances = np.empty(y.shape[0])
    for t, (phi, v) in enumerate(levinson_recursion(gamma)):
        errors[t] = y[t] - phi @ y[t - 1::-1][:t] if t else y[0]
        variances[t] = v
    return variances, errors


def exact_loglik(x, mu, sigma, d):
    """
    Exact Gaussian FI(d) log-likelihood::

        -n/2 log(2 pi) - n log(sigma) - 1/2 log det(Sigma_d) - Q(x|mu,d) / (2 sigma^2)

    :param x: Observed series.
    :param mu: Process mean.
    :param sigma: Innovation scale.
    :param d: Memory parameter in (-1/2, 1/2).
    :return: Tuple (loglik, logdet, Q).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DataError("The series must be a non-empty vector")
    if not sigma > 0:
        raise DomainError("sigma must be positive, got {}".format(sigma))
    gamma = acv_fid(d, x.size - 1)
    variances, errors = dl_innovations(gamma, x - mu)
    logdet = np.sum(np.log(variances))
    Q = np.sum(errors ** 2 / variances)
    loglik = -0.5 * x.size * LOG_2PI - x.size * np.log(sigma) - 0.5 * logdet - Q / (2.0 * sigma ** 2)
    return loglik, logdet, Q


class LikelihoodContext:
    """
    Cached pieces of the likelihood for the current memory parameter, so that
    updates of mu and sigma cost O(n).

    In 'approx' mode the cache holds pi, Pi_P and the vector c. In 'exact' mode
    (Gaussian FI(d) only) it holds log det(Sigma_d) and the Durbin-Levinson
    inner products of x and of the unit vector, from which Q(x|mu,d),
    1' Sigma_d^-1 1 and x' Sigma_d^-1 1 follow for any mu.

    :param aug: :class:`AugmentedSeries` (only ``aug.x`` is used in exact mode).
    :param memory: :class:`MemoryParams`.
    :param mode: 'approx' or 'exact'.
    """
    def __init__(self, aug, memory, mode="approx"):
        if mode not in MODES:
            raise ValueError("Unknown likelihood mode {!r}; use one of {}".format(mode, MODES))
        if not abs(memory.d) < 0.5:
            raise DomainError("d = {} is outside (-1/2, 1/2)".format(memory.d))
        self.aug = aug
        self.memory = memory
        self.mode = mode

        if mode == "approx":
            self.pi = arfima_pi_coeffs(memory, aug.P)
            self.Pi_P = self.pi.sum()
            self.c = compute_c(aug, self.pi)
        else:
            if memory.p or memory.q:
                raise UnsupportedOperationError("The exact likelihood is only available for FI(d) models")
            gamma = acv_fid(memory.d, aug.n - 1)
            variances, errors = dl_innovations(gamma, np.column_stack((aug.x, np.ones(aug.n))))
            self.logdet = np.sum(np.log(variances))
            self.xSx = np.sum(errors[:, 0] ** 2 / variances)
            self.xS1 = np.sum(errors[:, 0] * errors[:, 1] / variances)
            self.oneS1 = np.sum(errors[:, 1] ** 2 / variances)

    @property
    def n(self):
        return self.aug.n

    def residuals(self, mu):
        """
        :return: c_t - Pi_P mu (approximate mode only).
        """
        return self.c - self.Pi_P * mu

    def sum_squares(self, mu):
        """
        :param mu: Process mean.
        :return: sum_t (c_t - Pi_P mu)^2 in approximate mode, Q(x|mu,d) in exact mode.
        """
        if self.mode == "approx":
            return np.sum(self.residuals(mu) ** 2)
        return max(self.xSx - 2.0 * mu * self.xS1 + mu ** 2 * self.oneS1, 0.0)

    def loglik(self, mu, innovation):
        """
        :param mu: Process mean.
        :param innovation: :class:`InnovationSpec`.
        :return: Log-likelihood at (mu, innovation) and the cached memory.
        """
        sigma = innovation.sigma
        if self.mode == "approx":
            z = self.residuals(mu) / sigma
            return -self.n * np.log(sigma) + np.sum(innovation_logpdf(z, innovation.family, innovation.shape))
        if not innovation.is_gaussian:
            raise UnsupportedOperationError("The exact likelihood requires Gaussian innovations")
        return (-0.5 * self.n * LOG_2PI - self.n * np.log(sigma) - 0.5 * self.logdet
                - self.sum_squares(mu) / (2.0 * sigma ** 2))

    def with_memory(self, memory):
        return LikelihoodContext(self.aug, memory, self.mode)

    def with_aug(self, aug):
        return LikelihoodContext(aug, self.memory, self.mode)
