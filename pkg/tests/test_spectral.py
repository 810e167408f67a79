import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss

from vvkrr.kernel import KernelSpec
from vvkrr.spectral import (
    SpectralModel,
    certify_effective_dimension_bound,
    cosine_basis,
    effective_dimension,
    embedding_constant,
    estimate_decay,
    evaluate_coefficients,
    gamma_norm,
    nystrom_spectrum,
)


def gauss_legendre_01(n):
    t, w = leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def test_cosine_basis_orthonormal_by_quadrature():
    x, w = gauss_legendre_01(400)
    phi = cosine_basis(x, 40)
    np.testing.assert_allclose(phi.T @ (w[:, None] * phi), np.eye(40), atol=1e-12)


def test_cosine_basis_values():
    phi = cosine_basis([0.0, 0.5, 1.0], 3)
    np.testing.assert_allclose(phi[:, 0], 1.0)
    np.testing.assert_allclose(phi[:, 1], [math.sqrt(2), 0.0, -math.sqrt(2)], atol=1e-15)
    np.testing.assert_allclose(phi[:, 2], [math.sqrt(2), -math.sqrt(2), math.sqrt(2)], atol=1e-15)
    with pytest.raises(ValueError):
        cosine_basis([1.5], 3)


@given(st.integers(1, 300), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_series_evaluation_matches_basis_matrix(I_max, d, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((I_max, d))
    x = rng.uniform(size=50)
    scale = np.abs(c).sum()
    np.testing.assert_allclose(evaluate_coefficients(c, x), cosine_basis(x, I_max) @ c,
                               atol=1e-13 * scale)
    np.testing.assert_allclose(evaluate_coefficients(c[:, 0], x), cosine_basis(x, I_max) @ c[:, 0],
                               atol=1e-13 * scale)


def test_from_decay_and_validation():
    m = SpectralModel.from_decay(0.5, I_max=4, scale=2.0)
    np.testing.assert_allclose(m.mu, [2.0, 0.5, 2 / 9, 0.125])
    assert m.I_max == 4
    assert m.kappa2 == pytest.approx(2.0 + 2 * (0.5 + 2 / 9 + 0.125))
    with pytest.raises(ValueError):
        m.mu[0] = 3.0
    with pytest.raises(ValueError, match="nonincreasing"):
        SpectralModel([0.5, 1.0])
    with pytest.raises(ValueError, match="strictly positive"):
        SpectralModel([1.0, 0.0])
    with pytest.raises(ValueError):
        SpectralModel.from_decay(1.5)


@pytest.mark.parametrize(
    "model",
    [SpectralModel.from_decay(0.5), SpectralModel.from_decay(0.3, I_max=7, scale=0.5),
     SpectralModel([1.0, 0.3, 0.3, 0.01]), SpectralModel([2.0, 1.0], decay_p=1.0)],
)
def test_text_roundtrip(model):
    back = SpectralModel.from_text(model.to_text())
    assert back == model
    assert hash(back) == hash(model)


def test_gamma_norm_examples():
    assert gamma_norm(SpectralModel([1.0]), [[1.0]], 0.5) == 1.0
    assert gamma_norm(SpectralModel([0.25]), [[1.0]], 1.0) == 2.0
    with pytest.raises(ValueError):
        gamma_norm(SpectralModel([1.0, 0.5]), [[1.0]], 0.0)
    with pytest.raises(ValueError):
        gamma_norm(SpectralModel([1.0]), [[1.0]], -0.1)


def test_gamma_norm_zero_is_l2_norm_by_monte_carlo(rng):
    model = SpectralModel.from_decay(0.5, I_max=128)
    c = rng.standard_normal((128, 3)) * np.sqrt(model.mu)[:, None]
    x = rng.uniform(size=100_000)
    mc = np.mean(np.sum(evaluate_coefficients(c, x) ** 2, axis=1))
    assert mc == pytest.approx(gamma_norm(model, c, 0.0) ** 2, rel=1e-2)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_gamma_norm_monotone_in_gamma(g1, g2, seed):
    # mu <= 1, so mu**-gamma grows with gamma.
    model = SpectralModel.from_decay(0.5, I_max=32)
    c = np.random.default_rng(seed).standard_normal((32, 2))
    lo, hi = sorted((g1, g2))
    assert gamma_norm(model, c, lo) <= gamma_norm(model, c, hi) * (1 + 1e-12)


def test_effective_dimension_examples():
    assert effective_dimension(SpectralModel([1.0]), 1.0) == 0.5
    assert effective_dimension(SpectralModel([1.0, 0.25]), 1.0) == pytest.approx(0.7, rel=1e-15)
    m = SpectralModel.from_decay(0.5)
    values = [effective_dimension(m, lam) for lam in np.geomspace(1e-3, 1e6, 30)]
    assert np.all(np.diff(values) < 0)
    assert values[-1] < 1e-5
    with pytest.raises(ValueError):
        effective_dimension(m, 0.0)


def test_certificate_examples():
    m = SpectralModel.from_decay(0.5)
    D, ok = certify_effective_dimension_bound(m, [1, 0.1, 0.01, 0.001])
    assert ok and D == pytest.approx(1.501286613558472, rel=1e-12)
    D, ok = certify_effective_dimension_bound(SpectralModel([1.0], decay_p=1.0), [1, 0.1, 1e-3])
    assert ok and D <= 1
    with pytest.raises(ValueError):
        certify_effective_dimension_bound(SpectralModel([1.0]), [0.1])


def test_certificate_detects_growth():
    # 1/i decays too slowly for p = 0.5; with 10**5 terms the growth shows on [1e-4, 1].
    i = np.arange(1, 100_001, dtype=float)
    D, ok = certify_effective_dimension_bound(SpectralModel(1 / i, decay_p=0.5),
                                              np.geomspace(1e-4, 1, 25))
    assert not ok
    assert D == pytest.approx(239.78498190793624, rel=1e-9)


def test_certificate_on_logarithmic_spectrum_is_fooled_by_truncation():
    # mu_i = 1/log(i + 2) violates every polynomial decay law, but a truncated
    # spectrum has N(lam) <= I_max, so N(lam) lam**0.9 falls as lam -> 0.
    for I_max in (512, 100_000):
        i = np.arange(1, I_max + 1, dtype=float)
        model = SpectralModel(1 / np.log(i + 2), decay_p=0.9)
        _, ok = certify_effective_dimension_bound(model, np.geomspace(1e-4, 1, 25))
        assert ok


def test_embedding_constant_examples():
    assert embedding_constant(SpectralModel([1.0]), 0.3) == pytest.approx(1.0, rel=1e-14)
    assert embedding_constant(SpectralModel([1.0, 1.0]), 1.0) == pytest.approx(math.sqrt(3), rel=1e-14)
    m = SpectralModel.from_decay(0.5)
    A2 = embedding_constant(m, 1.0) ** 2
    assert A2 <= 1 + math.pi**2 / 3
    # Every cosine peaks at x = 0, so the envelope is attained there.
    assert A2 == pytest.approx(m.mu[0] + 2 * m.mu[1:].sum(), rel=1e-12)


@given(st.floats(0.05, 1.0))
def test_embedding_constant_dominates_random_points(alpha):
    m = SpectralModel.from_decay(0.5, I_max=64)
    x = np.random.default_rng(0).uniform(size=200)
    values = (m.basis(x) ** 2) @ m.mu**alpha
    assert values.max() <= embedding_constant(m, alpha) ** 2 * (1 + 1e-12)


def test_nystrom_examples(rng):
    two = KernelSpec.designed(SpectralModel([1.0, 0.25]))
    mu_hat = nystrom_spectrum(two, rng.uniform(size=2000))
    assert mu_hat[0] == pytest.approx(1.0, rel=0.1)
    assert mu_hat[1] == pytest.approx(0.25, rel=0.1)
    assert np.all(np.diff(mu_hat) <= 0)
    const = KernelSpec.designed(SpectralModel([1.0]))
    mu_hat = nystrom_spectrum(const, rng.uniform(size=50))
    assert mu_hat[0] == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(mu_hat[1:], 0.0, atol=1e-13)
    with pytest.raises(ValueError):
        nystrom_spectrum(const, [0.5])


def test_nystrom_decay_of_matern_half(rng):
    mu_hat = nystrom_spectrum(KernelSpec("matern", order=0.5), rng.uniform(size=2000))
    assert abs(estimate_decay(mu_hat) - 0.5) <= 0.15


def test_estimate_decay_examples():
    i = np.arange(1, 201, dtype=float)
    assert estimate_decay(i**-2.0) == pytest.approx(0.5, abs=1e-9)
    assert estimate_decay(i**-4.0) == pytest.approx(0.25, abs=1e-9)
    assert estimate_decay(3 * i**-1.0, fit_range=(1, 200)) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        estimate_decay(np.zeros(200))
