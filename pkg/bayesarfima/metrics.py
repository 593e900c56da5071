import numpy as np
from scipy import stats


def residuals(estimates, truth):
    """
    :param estimates: Point estimates of d, one per replicate.
    :param truth: True value (scalar or one per replicate).
    :return: The residuals estimate - truth.
    """
    return np.asarray(estimates, dtype=float) - np.asarray(truth, dtype=float)


def rmse(estimates, truth):
    """
    :return: Root mean squared residual.
    """
    return float(np.sqrt(np.mean(residuals(estimates, truth) ** 2)))


def coverage(lower, upper, truth):
    """
    :param lower: Lower interval endpoints, one per replicate.
    :param upper: Upper interval endpoints, one per replicate.
    :param truth: True value (scalar or one per replicate).
    :return: Tuple (number of intervals containing the truth, fraction).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    hits = int(np.count_nonzero((lower <= truth) & (truth <= upper)))
    return hits, hits / lower.size


def tv_distance(p, q):
    """
    :param p: Probability table.
    :param q: Probability table of the same shape.
    :return: Total variation distance 1/2 sum |p - q|.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("Tables of shapes {} and {} are not comparable".format(p.shape, q.shape))
    return 0.5 * float(np.sum(np.abs(p - q)))


def loglog_slope(x, y):
    """
    :return: Least squares slope of log(y) on log(x) and its standard error.
    """
    fit = stats.linregress(np.log(x), np.log(y))
    return float(fit.slope), float(fit.stderr)


def semilog_slope(x, y):
    """
    :return: Least squares slope of log(y) on x and its standard error.
    """
    fit = stats.linregress(np.asarray(x, dtype=float), np.log(y))
    return float(fit.slope), float(fit.stderr)
