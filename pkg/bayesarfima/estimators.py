"""
Classical estimators of the memory parameter d, used as comparators for the
Bayesian fits: rescaled range (R/S), log-periodogram regression (GPH) and
detrended fluctuation analysis (DFA). All three are invariant under affine
transformations of the series.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from bayesarfima.errors import DataError, NumericalError

METHODS = ("RS", "GPH", "DFA")


@dataclass
class EstimatorResult:
    d_hat: float
    method: str
    stderr: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError("Unknown method {!r}".format(self.method))
        if not np.isfinite(self.d_hat):
            raise NumericalError("{} produced a non-finite estimate".format(self.method))
        self.d_hat = float(self.d_hat)

    def to_dict(self):
        return {"method": self.method, "d_hat": self.d_hat, "stderr": self.stderr,
                "diagnostics": self.diagnostics}


def _as_series(x, minimum):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise DataError("The series must be a finite vector")
    if x.size < minimum:
        raise ValueError("At least {} observations are required, got {}".format(minimum, x.size))
    if np.ptp(x) == 0:
        raise DataError("The series is constant")
    return x


def estimate_rs(x, min_block=16):
    """
    Rescaled adjusted range over dyadic block sizes min_block, 2 min_block, ...
    up to n/2. The mean R/S of the blocks of each size is regressed on the
    size in log-log scale and d = slope - 1/2.

    :param x: Series (n >= 64, not constant).
    :param min_block: Smallest block size.
    :return: :class:`EstimatorResult`.
    """
    x = _as_series(x, 64)
    n = x.size
    sizes = []
    rs = []
    size = int(min_block)
    while size <= n // 2:
        blocks = x[:(n // size) * size].reshape(-1, size)
        dev = np.cumsum(blocks - blocks.mean(axis=1, keepdims=True), axis=1)
        r = dev.max(axis=1) - dev.min(axis=1)
        s = blocks.std(axis=1)
        ok = s > 0
        if np.any(ok):
            sizes.append(size)
            rs.append(np.mean(r[ok] / s[ok]))
        size *= 2
    if len(sizes) < 2:
        raise DataError("Not enough non-degenerate blocks for the R/S regression")
    fit = stats.linregress(np.log(sizes), np.log(rs))
    return EstimatorResult(fit.slope - 0.5, "RS", float(fit.stderr),
                           {"slope": float(fit.slope), "block_sizes": [int(s) for s in sizes]})


def periodogram(x):
    """
    :return: Fourier frequencies lambda_j = 2 pi j / n, j = 1..floor(n/2), and
             the periodogram I(lambda_j) = |sum_t x_t e^(-i t lambda_j)|^2 / (2 pi n).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    coeffs = np.fft.rfft(x - x.mean())[1:n // 2 + 1]
    freq = 2.0 * np.pi * np.arange(1, coeffs.size + 1) / n
    return freq, np.abs(coeffs) ** 2 / (2.0 * np.pi * n)


def estimate_gph(x, bandwidth=None):
    """
    Log-periodogram regression on the m lowest Fourier frequencies::

        log I(lambda_j) = c + d (-log(4 sin^2(lambda_j / 2))) + error

    :param x: Series (n >= 64).
    :param bandwidth: Number of frequencies m (default floor(sqrt(n))).
    :return: :class:`EstimatorResult` with the regression stderr.
    """
    x = _as_series(x, 64)
    m = int(np.floor(np.sqrt(x.size))) if bandwidth is None else int(bandwidth)
    if m < 4:
        raise ValueError("The GPH bandwidth must be at least 4, got {}".format(m))
    freq, power = periodogram(x)
    if m > freq.size:
        raise ValueError("Bandwidth {} exceeds the {} Fourier frequencies".format(m, freq.size))
    freq, power = freq[:m], power[:m]
    floor = np.finfo(float).eps * power.max()
    floored = int(np.count_nonzero(power < floor))
    fit = stats.linregress(-np.log(4.0 * np.sin(freq / 2.0) ** 2), np.log(np.maximum(power, floor)))
    return EstimatorResult(fit.slope, "GPH", float(fit.stderr),
                           {"bandwidth": m, "intercept": float(fit.intercept), "floored": floored})


def dfa_scales(n, order=1, count=12):
    low = max(10, order + 3)
    high = n // 4
    return np.unique(np.rint(np.logspace(np.log10(low), np.log10(high), count)).astype(int))


def fluctuation(profile, scale, order):
    """
    :return: Root mean square residual of a least-squares polynomial of degree
             ``order`` fitted to each non-overlapping window of ``scale`` points.
    """
    windows = profile[:(profile.size // scale) * scale].reshape(-1, scale)
    design = np.vander(np.arange(scale, dtype=float), order + 1)
    coef, _, _, _ = np.linalg.lstsq(design, windows.T, rcond=None)
    residual = windows.T - design @ coef
    return np.sqrt(np.mean(residual ** 2))


def estimate_dfa(x, order=1):
    """
    Detrended fluctuation analysis: F(s) of the profile (cumulative sum of the
    centred series) over log-spaced scales between 10 and n/4, d = slope - 1/2.

    :param x: Series (n >= 128).
    :param order: Degree of the detrending polynomial in every window.
    :return: :class:`EstimatorResult`.
    """
    x = _as_series(x, 128)
    if order < 0:
        raise ValueError("The detrending order must be non-negative")
    scales = dfa_scales(x.size, order)
    if scales.size < 8:
        raise ValueError("DFA needs at least 8 distinct scales, got {}".format(scales.size))
    profile = np.cumsum(x - x.mean())
    F = np.array([fluctuation(profile, s, order) for s in scales])
    if np.any(F <= 0):
        raise DataError("Vanishing fluctuation function")
    fit = stats.linregress(np.log(scales), np.log(F))
    return EstimatorResult(fit.slope - 0.5, "DFA", float(fit.stderr),
                           {"slope": float(fit.slope), "order": int(order), "scales": scales.tolist()})


ESTIMATORS = {"RS": estimate_rs, "GPH": estimate_gph, "DFA": estimate_dfa}


def estimate_all(x, methods=METHODS):
    """
    Runs every requested estimator; failures are kept as error entries.

    :return: Dictionary method -> result dictionary or {"error": message}.
    """
    report = {}
    for method in methods:
        try:
            report[method] = ESTIMATORS[method](x).to_dict()
        except (ValueError, ArithmeticError) as err:
            report[method] = {"method": method, "error": "{}: {}".format(type(err).__name__, err)}
    return report
