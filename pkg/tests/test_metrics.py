import numpy as np
import pytest

from bayesarfima import metrics


def test_residuals_and_rmse():
    np.testing.assert_allclose(metrics.residuals([0.1, 0.3], 0.2), [-0.1, 0.1])
    assert metrics.rmse([0.1, 0.3], 0.2) == pytest.approx(0.1)
    assert metrics.rmse([0.2, 0.2], [0.2, 0.2]) == 0.0


def test_coverage_counts_closed_intervals():
    hits, fraction = metrics.coverage([0.0, 0.25, -1.0, 0.3], [0.2, 0.5, 0.3, 0.4], 0.2)
    assert hits == 2
    assert fraction == 0.5


def test_tv_distance():
    p = np.array([[0.5, 0.25], [0.25, 0.0]])
    assert metrics.tv_distance(p, p) == 0.0
    assert metrics.tv_distance(p, [[0.0, 0.25], [0.25, 0.5]]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        metrics.tv_distance(p, [0.5, 0.5])


def test_slopes_recover_power_law_and_exponential():
    n = np.array([128, 256, 512, 1024, 2048])
    slope, stderr = metrics.loglog_slope(n, 3.0 * n ** -0.5)
    assert slope == pytest.approx(-0.5)
    assert stderr == pytest.approx(0.0, abs=1e-10)
    d = np.array([-0.4, -0.2, 0.0, 0.2, 0.4])
    slope, _ = metrics.semilog_slope(d, 0.1 * np.exp(1.7 * d))
    assert slope == pytest.approx(1.7)
