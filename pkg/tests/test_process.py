import numpy as np
import pytest
from scipy import integrate, special

from bayesarfima.errors import DomainError
from bayesarfima.process import (InnovationSpec, MemoryParams, ReparamMemory, acf_fid, acv_fid, arfima_pi_coeffs,
                                 arfima_psi_coeffs, fi_pi_coeffs, fi_psi_coeffs, is_stationary_invertible,
                                 monahan_to_pacf, pacf_to_monahan, sdf_arfima)


def test_fi_pi_coeffs_first_terms():
    d = 0.3
    pi = fi_pi_coeffs(d, 3)
    np.testing.assert_allclose(pi, [1.0, -d, -d * (1 - d) / 2, -d * (1 - d) * (2 - d) / 6], atol=1e-15)


@pytest.mark.parametrize("d", [-0.45, -0.3, 0.1, 0.25, 0.4])
def test_fi_pi_recurrence_matches_gamma_form(d):
    k = np.arange(101)
    sign = special.gammasgn(k - d) * special.gammasgn(-d)
    closed = sign * np.exp(special.gammaln(k - d) - special.gammaln(k + 1) - special.gammaln(-d))
    np.testing.assert_allclose(fi_pi_coeffs(d, 100), closed, rtol=0, atol=1e-10)
    np.testing.assert_allclose(fi_pi_coeffs(0.4, 2), [1.0, -0.4, -0.12], atol=1e-15)
    np.testing.assert_allclose(fi_psi_coeffs(0.4, 2), [1.0, 0.4, 0.28], atol=1e-15)


def test_fi_zero_memory_is_identity():
    np.testing.assert_array_equal(fi_pi_coeffs(0.0, 5), [1, 0, 0, 0, 0, 0])


def test_negative_truncation_rejected():
    with pytest.raises(ValueError):
        fi_pi_coeffs(0.1, -1)


@pytest.mark.parametrize("memory", [MemoryParams(0.3), MemoryParams(-0.2, [0.5], []),
                                    MemoryParams(0.1, [0.3, -0.2], [0.4]), MemoryParams(0.45, [], [-0.6, 0.2])])
def test_pi_and_psi_are_inverse_series(memory):
    P = 200
    product = np.convolve(arfima_pi_coeffs(memory, P), arfima_psi_coeffs(memory, P))[:P + 1]
    expected = np.zeros(P + 1)
    expected[0] = 1.0
    np.testing.assert_allclose(product, expected, atol=1e-10)


def test_fi_psi_is_pi_with_negated_d():
    np.testing.assert_array_equal(fi_psi_coeffs(0.2, 10), fi_pi_coeffs(-0.2, 10))


def test_acf_lag_one():
    for d in (-0.35, 0.0, 0.25, 0.45):
        assert acf_fid(d, 1) == pytest.approx(d / (1 - d), abs=1e-14)
        assert acf_fid(d, 0) == 1.0


def test_acv_zero_memory_is_white_noise():
    np.testing.assert_allclose(acv_fid(0.0, 4, sigma=2.0), [4.0, 0, 0, 0, 0], atol=1e-15)


def test_acv_matches_acf():
    gamma = acv_fid(0.3, 10)
    for k in range(11):
        assert gamma[k] / gamma[0] == pytest.approx(acf_fid(0.3, k), rel=1e-12)


@pytest.mark.parametrize("d", [-0.3, 0.1, 0.3])
def test_acv_matches_spectral_quadrature(d):
    memory = MemoryParams(d)
    sigma = 1.3
    gamma = acv_fid(d, 5, sigma)

    # Factor lambda^(-2d) out of the integrand for the algebraic weight.
    def smooth(lam, k):
        if lam == 0:
            base = sigma ** 2 / (2 * np.pi)
        else:
            base = sdf_arfima(memory, sigma, lam) * lam ** (2 * d)
        return 2.0 * base * np.cos(k * lam)

    for k in range(6):
        value, _ = integrate.quad(smooth, 0.0, np.pi, args=(k,), weight="alg", wvar=(-2 * d, 0.0),
                                  epsabs=1e-13, epsrel=1e-12, limit=200)
        assert value == pytest.approx(gamma[k], rel=1e-6, abs=1e-10)


def test_sdf_infinite_at_origin_for_positive_d():
    with pytest.raises(DomainError):
        sdf_arfima(MemoryParams(0.2), 1.0, 0.0)
    assert sdf_arfima(MemoryParams(-0.2), 1.0, 0.0) == 0.0


def test_sdf_white_noise_flat():
    freq = np.linspace(0, np.pi, 7)
    np.testing.assert_allclose(sdf_arfima(MemoryParams(), 2.0, freq), 4.0 / (2 * np.pi))


def test_sdf_peaks_at_both_ends():
    # AR part with phi = 0.92 puts power near pi, long memory near 0.
    memory = MemoryParams(0.25, [0.92])
    freq = np.linspace(0.001, np.pi, 200)
    f = sdf_arfima(memory, 1.0, freq)
    middle = f[80:120].max()
    assert f[0] > 5 * middle
    assert f[-1] > 5 * middle


def test_pacf_round_trip(rng):
    for p in range(0, 8):
        for _ in range(50):
            varphi = rng.uniform(-1, 1, p)
            phi = pacf_to_monahan(varphi)
            np.testing.assert_allclose(monahan_to_pacf(phi), varphi, atol=1e-12)


def test_pacf_of_single_coefficient():
    np.testing.assert_array_equal(pacf_to_monahan([0.7]), [0.7])
    np.testing.assert_allclose(pacf_to_monahan([0.5, 0.2]), [0.5 + 0.2 * 0.5, 0.2])


def test_non_stationary_rejected():
    with pytest.raises(DomainError):
        monahan_to_pacf([1.5])
    with pytest.raises(DomainError):
        MemoryParams(0.1, [0.0, 1.0]).to_reparam()
    with pytest.raises(ValueError):
        pacf_to_monahan([1.0])


def test_is_stationary_invertible():
    assert is_stationary_invertible(MemoryParams(0.2, [0.92], [-0.5]))
    assert not is_stationary_invertible(MemoryParams(0.5))
    assert not is_stationary_invertible(MemoryParams(0.0, [], [2.0]))


def _yule_walker_acv(phi):
    # Dense solve of gamma(k) + sum_j phi_j gamma(|k - j|) = delta_k0, k = 0..p.
    p = len(phi)
    system = np.eye(p + 1)
    for k in range(p + 1):
        for j, coeff in enumerate(phi, 1):
            system[k, abs(k - j)] += coeff
    rhs = np.zeros(p + 1)
    rhs[0] = 1.0
    return np.linalg.solve(system, rhs)


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_dropping_last_pacf_rescales_autocovariances(p, rng):
    varphi = rng.uniform(-0.8, 0.8, p)
    full = _yule_walker_acv(pacf_to_monahan(varphi))
    reduced = _yule_walker_acv(pacf_to_monahan(varphi[:-1]))
    np.testing.assert_allclose(reduced[:p], full[:p] * (1 - varphi[-1] ** 2), atol=1e-10)
    np.testing.assert_allclose(reduced[:p] / reduced[0], full[:p] / full[0], atol=1e-10)


def test_reparam_vector_layout():
    r = ReparamMemory(0.1, [0.2, 0.3], [-0.4])
    np.testing.assert_array_equal(r.as_vector(), [0.1, 0.2, 0.3, -0.4])
    back = ReparamMemory.from_vector(r.as_vector(), 2, 1)
    np.testing.assert_array_equal(back.vartheta, [-0.4])
    np.testing.assert_array_equal(ReparamMemory.bounds(2, 1), [0.5, 1, 1, 1])
    assert r.inside()
    assert not ReparamMemory(0.5).inside()


def test_memory_reparam_round_trip():
    memory = MemoryParams(0.2, [0.5, -0.1], [0.3])
    back = memory.to_reparam().to_memory()
    np.testing.assert_allclose(back.phi, memory.phi, atol=1e-12)
    np.testing.assert_allclose(back.theta, memory.theta, atol=1e-12)
    assert "ARFIMA(2, d, 1)" in str(memory)


def test_innovation_validation():
    with pytest.raises(DomainError):
        InnovationSpec(sigma=0.0)
    with pytest.raises(ValueError):
        InnovationSpec("student_t", 1.0, 2.0)
    with pytest.raises(ValueError):
        InnovationSpec("cauchy")
    assert InnovationSpec("student_t", 2.0, 5).with_sigma(3.0).shape == 5.0
