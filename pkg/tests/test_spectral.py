import numpy as np
import pytest
from scipy import integrate

from waveobs.spectral import (
    VectorState,
    basis_values,
    ks_norm,
    ks_pair_norm,
    ks_weights,
    laplacian_spectrum,
    pair_weights,
)


@pytest.mark.parametrize("M", [1, 4, 16, 64])
def test_gram_is_identity(M):
    g = laplacian_spectrum(M)
    assert np.max(np.abs(g.gram() - np.eye(M))) < 1e-12


def test_eigenvalues_and_shapes():
    g = laplacian_spectrum(5)
    assert np.allclose(g.eigenvalues, (np.pi * np.arange(1, 6)) ** 2)
    assert g.basis_eval.shape == (5, g.Q) == g.basis_deriv.shape
    assert g.Q == 4 * 5 + 32


@pytest.mark.parametrize("M", [0, -3, 2.5])
def test_bad_mode_count(M):
    with pytest.raises(ValueError):
        laplacian_spectrum(M)


def test_too_few_quadrature_points():
    with pytest.raises(ValueError):
        laplacian_spectrum(8, quad_points=16)


def test_basis_matches_quad_projection():
    # projection of x(1-x) against an independent adaptive quadrature
    g = laplacian_spectrum(12)
    coef = g.project(g.quad_nodes * (1 - g.quad_nodes))
    for k in (1, 2, 5):
        ref, _ = integrate.quad(lambda x: x * (1 - x) * np.sqrt(2) * np.sin(k * np.pi * x), 0, 1)
        assert abs(coef[k - 1] - ref) < 1e-13


def test_synthesize_roundtrip(rng):
    g = laplacian_spectrum(10)
    a = rng.standard_normal(10)
    x = np.linspace(0, 1, 7)
    assert np.allclose(g.synthesize(a, x), a @ basis_values(10, x))
    assert np.allclose(g.project(g.synthesize(a)), a, atol=1e-12)


def test_trace_weights_signs():
    W = laplacian_spectrum(4).trace_weights()
    k = np.arange(1, 5)
    assert np.allclose(W[0], np.sqrt(2) * np.pi * k)
    assert np.allclose(W[1], np.sqrt(2) * np.pi * k * np.array([1, -1, 1, -1]))


def test_ks_norm_single_mode():
    a = np.zeros(6)
    a[2] = 2.0
    lam = (3 * np.pi) ** 2
    assert ks_norm(a, 1.5) == pytest.approx(2.0 * (1 + lam) ** 0.75, rel=1e-14)
    assert ks_norm(np.zeros(4), -3.0) == 0.0


def test_ks_norm_sums_components(rng):
    a = rng.standard_normal((3, 8))
    total = np.sqrt(sum(ks_norm(row, 0.5) ** 2 for row in a))
    assert ks_norm(a, 0.5) == pytest.approx(total, rel=1e-14)


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_ks_norm_rejects_nonfinite(bad):
    with pytest.raises(ValueError):
        ks_norm(np.ones(3), bad)
    with pytest.raises(ValueError):
        ks_norm(np.array([1.0, bad]), 0.0)


def test_pair_weights_ordering(rng):
    st = VectorState(rng.standard_normal((2, 2, 5)), s=0.5)
    w = pair_weights(2, 5, 0.5)
    assert np.sqrt(np.sum(w * np.abs(st.flat()) ** 2)) == pytest.approx(ks_pair_norm(st), rel=1e-14)
    assert np.allclose(w[:5], ks_weights(5, 1.5))


def test_vector_state_validation():
    with pytest.raises(ValueError):
        VectorState(np.zeros((3, 1, 4)))
    with pytest.raises(ValueError):
        VectorState(np.full((2, 1, 4), np.nan))


def test_vector_state_energy():
    st = VectorState.from_pair([[1.0, 0.0]], [[0.0, 2.0]])
    assert st.energy() == pytest.approx(np.pi**2 + 4.0)
    assert VectorState.zeros(2, 3).energy() == 0.0
