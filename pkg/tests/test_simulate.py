import numpy as np
import pytest
from scipy import integrate

from bayesarfima.errors import DomainError
from bayesarfima.process import InnovationSpec, MemoryParams, acf_fid, sdf_arfima
from bayesarfima.simulate import SimSpec, simulate_arfima, simulate_fid_exact


def test_same_seed_same_series():
    np.testing.assert_array_equal(simulate_fid_exact(200, 0.3, seed=4), simulate_fid_exact(200, 0.3, seed=4))
    assert not np.array_equal(simulate_fid_exact(200, 0.3, seed=4), simulate_fid_exact(200, 0.3, seed=5))


def test_fid_spec_matches_exact_draw():
    spec = SimSpec(n=300, memory=MemoryParams(0.2), mu=1.5, innovation=InnovationSpec(sigma=2.0), seed=7)
    np.testing.assert_array_equal(simulate_arfima(spec), simulate_fid_exact(300, 0.2, 1.5, 2.0, seed=7))


def test_zero_memory_is_scaled_white_noise():
    x = simulate_fid_exact(1000, 0.0, mu=3.0, sigma=0.5, seed=1)
    assert x.mean() == pytest.approx(3.0, abs=0.1)
    assert x.std() == pytest.approx(0.5, rel=0.1)


def test_neighbouring_seeds_are_uncorrelated():
    a = simulate_fid_exact(2000, 0.0, seed=10)
    b = simulate_fid_exact(2000, 0.0, seed=11)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.1


def test_invalid_parameters():
    with pytest.raises(DomainError, match="outside"):
        simulate_arfima(SimSpec(n=10, memory=MemoryParams(0.7)))
    with pytest.raises(DomainError):
        simulate_arfima(SimSpec(n=10, memory=MemoryParams(0.1, [1.2])))
    with pytest.raises(ValueError):
        simulate_fid_exact(0, 0.1)
    with pytest.raises(ValueError):
        simulate_arfima(SimSpec(n=10, burnin=-1))


def test_arma_series_length_and_burnin():
    spec = SimSpec(n=128, memory=MemoryParams(0.1, [0.5], [0.3]), seed=2).validate()
    assert spec.burnin == 500
    x = simulate_arfima(spec)
    assert x.shape == (128,)
    assert np.all(np.isfinite(x))


def test_student_t_innovations():
    spec = SimSpec(n=512, memory=MemoryParams(0.2), innovation=InnovationSpec("student_t", 1.0, 3.0), seed=3)
    x = simulate_arfima(spec)
    assert x.shape == (512,)
    assert np.all(np.isfinite(x))
    np.testing.assert_array_equal(x, simulate_arfima(spec))


@pytest.mark.slow
def test_lag_one_autocorrelation_of_long_series():
    d = 0.3
    x = simulate_fid_exact(2 ** 14, d, seed=21)
    centred = x - x.mean()
    r1 = centred[1:] @ centred[:-1] / (centred @ centred)
    assert r1 == pytest.approx(acf_fid(d, 1), abs=0.03)


def _quadrature_acv(memory, sigma, lags):
    d = memory.d

    # lambda^(-2d) goes into the quadrature weight.
    def smooth(lam, k):
        if lam == 0:
            theta, phi = 1 + np.sum(memory.theta), 1 + np.sum(memory.phi)
            base = sigma ** 2 / (2 * np.pi) * theta ** 2 / phi ** 2
        else:
            base = sdf_arfima(memory, sigma, lam) * lam ** (2 * d)
        return 2.0 * base * np.cos(k * lam)

    return np.array([integrate.quad(smooth, 0.0, np.pi, args=(k,), weight="alg", wvar=(-2 * d, 0.0),
                                    epsabs=1e-12, epsrel=1e-10, limit=200)[0] for k in range(lags + 1)])


@pytest.mark.slow
def test_sample_autocovariance_matches_spectral_density():
    memory = MemoryParams(0.25, [-0.5], [0.4])
    n, lags = 1000, 10
    acv = []
    for seed in range(100):
        x = simulate_arfima(SimSpec(n=n, memory=memory, seed=seed))
        acv.append([x[:n - k] @ x[k:] / (n - k) for k in range(lags + 1)])
    acv = np.array(acv)
    expected = _quadrature_acv(memory, 1.0, lags)
    se = acv.std(axis=0, ddof=1) / np.sqrt(acv.shape[0])
    assert np.all(np.abs(acv.mean(axis=0) - expected) < 4 * se)
