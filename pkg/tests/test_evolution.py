import numpy as np
import pytest
from scipy import integrate

from conftest import crandn
from waveobs.errors import InvalidWindowError
from waveobs.evolution import (
    BoundaryData,
    duality_check,
    evolve_duhamel,
    evolve_homogeneous,
    evolve_inhomogeneous,
    fourier_basis,
    lifting_cutoffs,
    normal_trace,
)
from waveobs.operators import SystemCoefficients, assemble_P, assemble_P_adjoint, shift_apply
from waveobs.spectral import VectorState, laplacian_spectrum
from waveobs.trace_norms import TimeWindow, make_window


def free(M, N=1):
    return assemble_P(SystemCoefficients.zero(N), laplacian_spectrum(M))


def mode_state(M, k, N=1, velocity=False):
    c = np.zeros((2, N, M))
    c[1 if velocity else 0, 0, k - 1] = 1.0
    return VectorState(c)


def test_eigenmode_half_period():
    tr = evolve_homogeneous(mode_state(8, 1), free(8), 1.0, 100)
    assert tr.final_state().u0[0, 0] == pytest.approx(-1.0, abs=1e-10)
    assert np.allclose(tr.positions[:, 0, 0], np.cos(np.pi * tr.times), atol=1e-10)


def test_constant_potential_frequency():
    c, k = 5.0, 3
    P = assemble_P(SystemCoefficients.constant_potential(c), laplacian_spectrum(6))
    tr = evolve_homogeneous(mode_state(6, k), P, 2.0, 400)
    omega = np.sqrt((k * np.pi) ** 2 + c)
    assert np.allclose(tr.positions[:, 0, k - 1], np.cos(omega * tr.times), atol=1e-10)


@pytest.mark.parametrize(
    "make",
    [
        lambda rng: SystemCoefficients.zero(2),
        lambda rng: SystemCoefficients.nilpotent_coupling(),
        lambda rng: SystemCoefficients.random_smooth(2, rng),
    ],
)
def test_time_reversibility(make, rng):
    P = assemble_P(make(rng), laplacian_spectrum(12))
    st = VectorState(crandn(rng, 2, 2, 12))
    fwd = evolve_homogeneous(st, P, 1.3, 200).final_state()
    back = evolve_homogeneous(fwd, P, -1.3, 200).final_state()
    assert np.linalg.norm(back.coeffs - st.coeffs) <= 1e-10 * np.linalg.norm(st.coeffs)


def test_energy_conservation(rng):
    st = VectorState(crandn(rng, 2, 2, 16))
    e = evolve_homogeneous(st, free(16, 2), 4.0, 4096).energies()
    assert np.max(np.abs(e - e[0])) <= 1e-9 * e[0]


def test_linearity(rng):
    P = assemble_P(SystemCoefficients.random_smooth(2, rng), laplacian_spectrum(8))
    A, B = VectorState(crandn(rng, 2, 2, 8)), VectorState(crandn(rng, 2, 2, 8))
    a, b = 0.3 - 2j, 1.7
    lhs = evolve_homogeneous(VectorState(a * A.coeffs + b * B.coeffs), P, 1.0, 64).coeffs
    rhs = a * evolve_homogeneous(A, P, 1.0, 64).coeffs + b * evolve_homogeneous(B, P, 1.0, 64).coeffs
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_shifted_solution(rng):
    P = assemble_P(SystemCoefficients.rotation_coupling(2.0), laplacian_spectrum(8))
    st = VectorState(crandn(rng, 2, 2, 8))
    mu, r = 3.0, 1
    shifted = VectorState(np.stack([shift_apply(st.u0, mu, r, P), shift_apply(st.u1, mu, r, P)]))
    a = evolve_homogeneous(st, P, 1.0, 50)
    b = evolve_homogeneous(shifted, P, 1.0, 50)
    for i in (0, 17, 50):
        got = np.stack([shift_apply(a.coeffs[i, 0], mu, r, P), shift_apply(a.coeffs[i, 1], mu, r, P)])
        assert np.max(np.abs(got - b.coeffs[i])) <= 1e-10 * np.max(np.abs(b.coeffs[i]))


def test_invalid_steps():
    with pytest.raises(ValueError):
        evolve_homogeneous(mode_state(4, 1), free(4), 1.0, 1)
    with pytest.raises(ValueError):
        evolve_homogeneous(mode_state(4, 1), free(4), 0.0, 10)


def test_duhamel_zero_source():
    tr = evolve_duhamel(np.zeros((11, 1, 4)), free(4), 1.0, 10)
    assert not np.any(tr.coeffs)


def test_duhamel_scalar_oracle():
    # F = sin(pi x) t; u = a(t) sin(pi x), a(t) = int_0^t sin(pi (t - s)) s / pi ds
    M, T, Nt = 6, 1.5, 3000
    t = np.linspace(0, T, Nt + 1)
    F = np.zeros((Nt + 1, 1, M))
    F[:, 0, 0] = t / np.sqrt(2)
    tr = evolve_duhamel(F, free(M), T, Nt)
    assert np.sqrt(2) * tr.positions[-1, 0, 0].real == pytest.approx(0.18423330989670615, abs=1e-6)
    mid = Nt // 3
    ref, _ = integrate.quad(lambda s: np.sin(np.pi * (t[mid] - s)) * s / np.pi, 0, t[mid])
    assert np.sqrt(2) * tr.positions[mid, 0, 0].real == pytest.approx(ref, abs=1e-6)


def test_duhamel_finite_difference_residual(rng):
    M, T, Nt = 8, 2.0, 2048
    P = assemble_P(SystemCoefficients.rotation_coupling(1.0), laplacian_spectrum(M))
    t = np.linspace(0, T, Nt + 1)
    amp = crandn(rng, 2, 3)
    F = np.zeros((Nt + 1, 2, M), complex)
    F[:, :, :3] = np.sin(2 * t)[:, None, None] * amp
    tr = evolve_duhamel(F, P, T, Nt)
    u = tr.positions.reshape(Nt + 1, -1)
    dt = T / Nt
    d2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / dt**2
    res = d2 - (u[1:-1] @ P.matrix.T + F[1:-1].reshape(Nt - 1, -1))
    lam = np.tile((np.pi * np.arange(1, M + 1)) ** 2, 2)
    wnorm = lambda a: np.sqrt(np.sum(np.abs(a) ** 2 / (1 + lam), axis=-1))
    assert np.max(wnorm(res)) <= 1e-4 * np.max(wnorm(F.reshape(Nt + 1, -1)))


def test_normal_trace_closed_form():
    M = 6
    c = np.zeros((2, 1, M))
    c[0, 0, 0] = 1 / np.sqrt(2)  # u0 = sin(pi x)
    tr = evolve_homogeneous(VectorState(c), free(M), 2.0, 200)
    sig = normal_trace(tr, laplacian_spectrum(M))
    assert sig.values.shape == (2, 1, 201)
    for e in (0, 1):
        assert np.allclose(sig.values[e, 0], np.pi * np.cos(np.pi * tr.times), atol=1e-10)


def test_normal_trace_even_mode_signs():
    tr = evolve_homogeneous(mode_state(4, 2), free(4), 1.0, 10)
    v = normal_trace(tr, laplacian_spectrum(4)).values[:, 0, 0]
    assert v[0] > 0 and v[1] < 0 and v[0] == pytest.approx(-v[1])


def test_trace_commutation(rng):
    # d_t^2 of the trace equals the trace of the solution with data P(u0, u1)
    M, T, Nt = 10, 2.0, 2048
    P = assemble_P(SystemCoefficients.rotation_coupling(1.5), laplacian_spectrum(M))
    c = np.zeros((2, 2, M), complex)
    c[..., :4] = crandn(rng, 2, 2, 4)
    st = VectorState(c)
    hi = VectorState(np.stack([P.apply(st.u0), P.apply(st.u1)]))
    g = laplacian_spectrum(M)
    a = normal_trace(evolve_homogeneous(st, P, T, Nt), g).values
    b = normal_trace(evolve_homogeneous(hi, P, T, Nt), g).values
    dt = T / Nt
    d2 = (a[..., 2:] - 2 * a[..., 1:-1] + a[..., :-2]) / dt**2
    assert np.max(np.abs(d2 - b[..., 1:-1])) <= 1e-4 * np.max(np.abs(b))


def test_fourier_basis_orthonormal():
    T, K = 2.0, 5
    t = np.linspace(0, T, 4001)
    B = fourier_basis(K, T, t)
    G = np.trapezoid(B[:, None, :] * B[None, :, :], t, axis=-1)
    assert np.allclose(G, np.eye(2 * K + 1), atol=1e-10)


def test_fourier_basis_derivatives():
    T, K = 1.5, 3
    t = np.linspace(0, T, 30001)
    h = t[1] - t[0]
    for order in (1, 2):
        fd = np.gradient(fourier_basis(K, T, t, order - 1), h, axis=1)
        assert np.max(np.abs(fd[:, 1:-1] - fourier_basis(K, T, t, order)[:, 1:-1])) < 1e-3


def test_lifting_cutoffs():
    x = np.array([0.0, 0.25, 0.5, 1.0])
    psi = lifting_cutoffs(x)
    assert np.allclose(psi[0], [1, 0, 0, 0]) and np.allclose(psi[1], [0, 0, 0, 1])
    # C^2 across x = 1/4
    for order in (1, 2):
        assert abs(lifting_cutoffs(np.array([0.25 - 1e-9]), order)[0, 0]) < 1e-6


def test_inhomogeneous_zero_data():
    T = 2.0
    P = assemble_P_adjoint(SystemCoefficients.zero(1), laplacian_spectrum(6))
    tr = evolve_inhomogeneous(BoundaryData.zeros(1, 3, T), make_window(T, 0.2, 1.8), P, T, 128)
    assert not np.any(tr.coeffs)


def test_inhomogeneous_window_must_avoid_ends():
    T = 2.0
    P = assemble_P_adjoint(SystemCoefficients.zero(1), laplacian_spectrum(6))
    with pytest.raises(InvalidWindowError):
        evolve_inhomogeneous(BoundaryData.zeros(1, 3, T), TimeWindow(T, 0.0, 1.0), P, T, 128)


def test_lifting_reconstruction(rng):
    T, Nt = 2.0, 400
    P = assemble_P_adjoint(SystemCoefficients.rotation_coupling(1.0), laplacian_spectrum(12))
    win = make_window(T, 0.1, 1.9, 0.8)
    f = BoundaryData.random(rng, 2, 4, T)
    tr = evolve_inhomogeneous(f, win, P, T, Nt)
    i = Nt // 2
    assert win(tr.times[i : i + 1])[0] == 1.0
    vals = tr.evaluate(i, [0.0, 1.0])
    expect = f.values(tr.times[i : i + 1])[:, :, 0].T
    assert np.max(np.abs(vals - expect)) < 1e-6


@pytest.mark.parametrize(
    "make",
    [
        lambda: SystemCoefficients.zero(2),
        lambda: SystemCoefficients.rotation_coupling(3.0),
        lambda: SystemCoefficients.nilpotent_coupling(),
        lambda: SystemCoefficients.constant_potential(2.0, 2),
    ],
)
def test_duality_exact_for_span_preserving(make, rng):
    c = make()
    g = laplacian_spectrum(16)
    P, Pa = assemble_P(c, g), assemble_P_adjoint(c, g)
    T = 2.5
    win = make_window(T, 0.2, 2.3, 0.5)
    for _ in range(3):
        f = BoundaryData.random(rng, 2, 10, T)
        st = VectorState(crandn(rng, 2, 2, 16))
        assert duality_check(st, f, win, P, Pa, T, 512).relative <= 1e-5


def test_duality_converges_first_order_otherwise():
    # for a drift term the Galerkin space is not invariant; the residual
    # <(I - Pi) P u, lifting> decays like 1/M
    rng = np.random.default_rng(0)
    c = SystemCoefficients.random_smooth(1, rng)
    T = 2.0
    win = make_window(T, 0.2, 1.8, 0.5)
    f = BoundaryData.random(rng, 1, 4, T)
    a0 = rng.standard_normal((2, 1, 4))
    res = []
    for M in (16, 32, 64):
        g = laplacian_spectrum(M)
        a = np.zeros((2, 1, M), complex)
        a[..., :4] = a0
        res.append(duality_check(VectorState(a), f, win, assemble_P(c, g), assemble_P_adjoint(c, g), T, 1024).relative)
    for r0, r1 in zip(res, res[1:]):
        assert 0.4 < r1 / r0 < 0.6
