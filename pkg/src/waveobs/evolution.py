"""Exact-in-time propagation of the Galerkin wave system.

The first-order system ``d/dt (u, u_t) = A (u, u_t)`` with
``A = [[0, I], [P, 0]]`` is advanced with one matrix exponential
``expm(A dt)`` reused at every step, so the only discretization left is
the Galerkin truncation (and trapezoid quadrature in Duhamel integrals).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from waveobs.errors import InvalidWindowError
from waveobs.operators import GalerkinOperator, SystemCoefficients
from waveobs.spectral import SpectralGrid, VectorState, basis_values
from waveobs.trace_norms import TimeWindow

LIFT_SUPPORT = 0.25


def first_order_matrix(P: GalerkinOperator) -> np.ndarray:
    n = P.matrix.shape[0]
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    A[:n, n:] = np.eye(n)
    A[n:, :n] = P.matrix
    return A


def propagator(P: GalerkinOperator, dt: float) -> np.ndarray:
    return la.expm(first_order_matrix(P) * dt)


@dataclass(frozen=True)
class Trajectory:
    """States on a uniform time grid.

    ``coeffs`` has shape (Nt+1, 2, N, M): position and velocity
    coefficients at each sample.
    """

    times: np.ndarray
    coeffs: np.ndarray
    s: float = 0.0

    @property
    def Nt(self) -> int:
        return self.times.size - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def positions(self) -> np.ndarray:
        return self.coeffs[:, 0]

    @property
    def velocities(self) -> np.ndarray:
        return self.coeffs[:, 1]

    def state(self, i: int) -> VectorState:
        return VectorState(self.coeffs[i], self.s)

    def final_state(self) -> VectorState:
        return self.state(-1)

    def energies(self) -> np.ndarray:
        M = self.coeffs.shape[-1]
        lam = (np.pi * np.arange(1, M + 1)) ** 2
        pos = np.sum(lam * np.abs(self.positions) ** 2, axis=(1, 2))
        vel = np.sum(np.abs(self.velocities) ** 2, axis=(1, 2))
        return pos + vel


@dataclass(frozen=True)
class TraceSignal:
    """Neumann trace samples, shape (2, N, Nt+1); endpoint 0 is x = 0."""

    values: np.ndarray
    dt: float
    T: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trace values must be finite")


def _time_grid(T: float, Nt: int) -> np.ndarray:
    if Nt < 2:
        raise ValueError("need Nt >= 2")
    if T == 0 or not np.isfinite(T):
        raise ValueError("horizon must be finite and nonzero")
    return np.linspace(0.0, T, Nt + 1)


def evolve_homogeneous(state: VectorState, P: GalerkinOperator, T: float, Nt: int) -> Trajectory:
    """Solve ``u_tt = P u`` from ``state``; a negative ``T`` runs backward."""
    times = _time_grid(T, Nt)
    N, M = state.N, state.M
    if N * M != P.matrix.shape[0]:
        raise ValueError("state and operator sizes differ")
    E = propagator(P, times[1] - times[0])
    if not np.all(np.isfinite(E)):
        raise FloatingPointError("matrix exponential evaluation failed")
    out = np.empty((Nt + 1, 2 * N * M), dtype=complex)
    out[0] = state.flat()
    for i in range(Nt):
        out[i + 1] = E @ out[i]
    return Trajectory(times, out.reshape(Nt + 1, 2, N, M), state.s)


def evolve_duhamel(F, P: GalerkinOperator, T: float, Nt: int) -> Trajectory:
    """Zero-data solution of ``u_tt = P u + F`` by variation of constants.

    ``F`` holds source coefficients on the time grid, shape (Nt+1, N, M)
    or (Nt+1, N*M).  The Duhamel integral up to each sample is evaluated
    with the trapezoid rule in the source time.
    """
    times = _time_grid(T, Nt)
    n = P.matrix.shape[0]
    F = np.asarray(F, dtype=complex).reshape(Nt + 1, n)
    dt = times[1] - times[0]
    E = propagator(P, dt)
    G = np.zeros((Nt + 1, 2 * n), dtype=complex)
    G[:, n:] = F
    # S_k = sum_{m<=k} E^{k-m} G_m, Z_k = E^k G_0
    S = G[0].copy()
    Z = G[0].copy()
    out = np.zeros((Nt + 1, 2 * n), dtype=complex)
    for k in range(1, Nt + 1):
        S = E @ S + G[k]
        Z = E @ Z
        out[k] = dt * (S - 0.5 * Z - 0.5 * G[k])
    M = P.M
    return Trajectory(times, out.reshape(Nt + 1, 2, n // M, M))


def normal_trace(traj: Trajectory, grid: SpectralGrid) -> TraceSignal:
    """Inward normal derivative at x = 0 and x = 1 for every sample."""
    W = grid.trace_weights()
    values = np.einsum("ek,tnk->ent", W, traj.positions)
    return TraceSignal(values, traj.dt, float(traj.times[-1]))


# -- boundary data and lifting --------------------------------------------


@dataclass(frozen=True)
class BoundaryData:
    """Boundary data f in an L2(0, T)-orthonormal Fourier basis.

    ``coeffs`` has shape (2, N, 2K+1): endpoint, component, basis index,
    with basis order 1, cos(w_1 t), sin(w_1 t), ..., w_h = 2 pi h / T.
    """

    coeffs: np.ndarray
    T: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != 2 or c.shape[2] % 2 != 1:
            raise ValueError("boundary coefficients must have shape (2, N, 2K+1)")
        object.__setattr__(self, "coeffs", c)

    @property
    def harmonics(self) -> int:
        return (self.coeffs.shape[2] - 1) // 2

    @property
    def N(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def zeros(cls, N: int, K: int, T: float) -> BoundaryData:
        return cls(np.zeros((2, N, 2 * K + 1), complex), T)

    @classmethod
    def random(cls, rng: np.random.Generator, N: int, K: int, T: float) -> BoundaryData:
        shape = (2, N, 2 * K + 1)
        return cls(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), T)

    def values(self, t, order: int = 0) -> np.ndarray:
        """f or its time derivatives at ``t``, shape (2, N, len(t))."""
        return np.einsum("enj,jt->ent", self.coeffs, fourier_basis(self.harmonics, self.T, t, order))


def fourier_basis(K: int, T: float, t, order: int = 0) -> np.ndarray:
    """Orthonormal trigonometric basis on (0, T) and derivatives, shape (2K+1, len(t))."""
    t = np.asarray(t, dtype=float)
    out = np.zeros((2 * K + 1, t.size))
    if order == 0:
        out[0] = 1.0 / np.sqrt(T)
    amp = np.sqrt(2.0 / T)
    for h in range(1, K + 1):
        w = 2.0 * np.pi * h / T
        c, s = np.cos(w * t), np.sin(w * t)
        # d^k/dt^k of (cos, sin) cycles through (-sin, cos), (-cos, -sin), ...
        if order == 0:
            out[2 * h - 1], out[2 * h] = c, s
        elif order == 1:
            out[2 * h - 1], out[2 * h] = -w * s, w * c
        elif order == 2:
            out[2 * h - 1], out[2 * h] = -(w**2) * c, -(w**2) * s
        else:
            raise ValueError("order must be 0, 1 or 2")
        out[2 * h - 1 : 2 * h + 1] *= amp
    return out


def fourier_frequencies(K: int, T: float) -> np.ndarray:
    h = np.concatenate([[0], np.repeat(np.arange(1, K + 1), 2)])
    return 2.0 * np.pi * h / T


def lifting_profile(x, order: int = 0) -> np.ndarray:
    """``eta(x) = (1 - 4x)^3`` on [0, 1/4], zero beyond; C^2 with eta(0) = 1."""
    x = np.asarray(x, dtype=float)
    z = np.clip(1.0 - x / LIFT_SUPPORT, 0.0, None)
    c = 1.0 / LIFT_SUPPORT
    if order == 0:
        return z**3
    if order == 1:
        return -3.0 * c * z**2
    if order == 2:
        return 6.0 * c**2 * z
    raise ValueError("order must be 0, 1 or 2")


def lifting_cutoffs(x, order: int = 0) -> np.ndarray:
    """psi_0(x) = eta(x) and psi_1(x) = eta(1 - x), shape (2, len(x))."""
    x = np.asarray(x, dtype=float)
    return np.vstack([lifting_profile(x, order), (-1) ** order * lifting_profile(1.0 - x, order)])


@dataclass(frozen=True)
class LiftingOperator:
    """Projections needed to turn boundary data into an interior source.

    ``mass[e]`` holds ``<psi_e, phi_j>``; ``stiff`` maps boundary values
    g (flattened (2, N)) to the coefficients of ``P* (sum_e g_e psi_e)``.
    """

    mass: np.ndarray
    stiff: np.ndarray


def assemble_lifting(coeffs: SystemCoefficients, grid: SpectralGrid, adjoint: bool = True) -> LiftingOperator:
    N, M = coeffs.N, grid.M
    nq = 4 * M + 64
    xg, wg = np.polynomial.legendre.leggauss(nq)
    xg = 0.5 * LIFT_SUPPORT * (xg + 1.0)
    wg = 0.5 * LIFT_SUPPORT * wg
    mass = np.zeros((2, M))
    stiff = np.zeros((N, M, 2, N), dtype=complex)
    k = np.arange(1, M + 1)
    for e, x in enumerate((xg, 1.0 - xg)):
        phi = basis_values(M, x)
        dphi = np.sqrt(2.0) * (np.pi * k)[:, None] * np.cos(np.pi * np.outer(k, x))
        psi = lifting_cutoffs(x)[e]
        d2psi = lifting_cutoffs(x, 2)[e]
        Xs, qs = coeffs.sample(x)
        if adjoint:
            Xs = np.conj(np.swapaxes(Xs, 1, 2))
            qs = np.conj(np.swapaxes(qs, 1, 2))
            # weak form: <X*(psi e_m), phi_j e_n> = int conj(X_mn) psi phi_j'
            drift = np.einsum("x,jx,x,xnm->njm", wg, dphi, psi, Xs)
        else:
            dpsi = lifting_cutoffs(x, 1)[e]
            drift = np.einsum("x,jx,x,xnm->njm", wg, phi, dpsi, Xs)
        pot = np.einsum("x,jx,x,xnm->njm", wg, phi, psi, qs)
        mass[e] = phi @ (wg * psi)
        lap = phi @ (wg * d2psi)
        stiff[:, :, e, :] = np.einsum("nm,j->njm", np.eye(N), lap) - drift - pot
    return LiftingOperator(mass, stiff.reshape(N * M, 2 * N))


@dataclass(frozen=True)
class InhomogeneousTrajectory(Trajectory):
    """Solution v = lifting + w; ``coeffs`` are those of the Galerkin part w.

    ``boundary`` holds Theta f at each sample, shape (Nt+1, 2, N).
    """

    boundary: np.ndarray = field(default=None, repr=False)
    boundary_dt: np.ndarray = field(default=None, repr=False)

    def evaluate(self, i: int, x) -> np.ndarray:
        """Point values of v at sample ``i``, shape (N, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        M = self.coeffs.shape[-1]
        w = self.positions[i] @ basis_values(M, x)
        return w + np.einsum("en,ex->nx", self.boundary[i], lifting_cutoffs(x))


def evolve_inhomogeneous(
    f: BoundaryData,
    window: TimeWindow,
    P_adj: GalerkinOperator,
    T: float,
    Nt: int,
) -> InhomogeneousTrajectory:
    """Solve ``v_tt = P* v``, zero data, ``v = Theta f`` on the boundary.

    The boundary data are lifted with the cutoffs psi_0, psi_1 and the
    remainder solves the Dirichlet problem with source
    ``-(d_t^2 - P*) lifting`` through :func:`evolve_duhamel`.
    """
    if window.T != T or not (0.0 < window.t0 and window.t1 < T):
        raise InvalidWindowError("window support must lie strictly inside (0, T)")
    if P_adj.coeffs is None:
        raise ValueError("operator must carry its coefficients for the lifting")
    N, M = P_adj.N, P_adj.M
    if f.N != N:
        raise ValueError("boundary data and operator have different component counts")
    times = _time_grid(T, Nt)
    th = [window.endpoint_profile(times, k) for k in range(3)]
    fv = [f.values(times, k) for k in range(3)]
    g = th[0][:, None, :] * fv[0]
    g1 = th[1][:, None, :] * fv[0] + th[0][:, None, :] * fv[1]
    g2 = th[2][:, None, :] * fv[0] + 2 * th[1][:, None, :] * fv[1] + th[0][:, None, :] * fv[2]
    lift = assemble_lifting(P_adj.coeffs, P_adj.grid, adjoint=(P_adj.flavor != "P"))
    # source = -(lifting_tt - P* lifting), projected on the sine basis
    src = -np.einsum("ej,ent->tnj", lift.mass, g2)
    src += (lift.stiff @ g.reshape(2 * N, -1)).T.reshape(Nt + 1, N, M)
    w = evolve_duhamel(src, P_adj, T, Nt)
    return InhomogeneousTrajectory(
        w.times,
        w.coeffs,
        0.0,
        np.moveaxis(g, -1, 0),
        np.moveaxis(g1, -1, 0),
    )


def trapezoid_weights(Nt: int, dt: float) -> np.ndarray:
    w = np.full(Nt + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


@dataclass
class DualityReport:
    lhs: complex
    rhs: complex
    residual: float
    relative: float


def duality_check(
    final_data: VectorState,
    f: BoundaryData,
    window: TimeWindow,
    P: GalerkinOperator,
    P_adj: GalerkinOperator,
    T: float,
    Nt: int,
) -> DualityReport:
    """Compare both sides of the transposition identity.

    With u solving ``u_tt = P u`` and ``(u(T), u_t(T)) = (u0, u1)``, and v
    from :func:`evolve_inhomogeneous`:
    ``<u1, v(T)> - <u0, v_t(T)> = int_0^T <d_n u, Theta f> dt``
    where ``d_n`` is the outward normal derivative (minus the inward trace).
    """
    v = evolve_inhomogeneous(f, window, P_adj, T, Nt).final_state()
    lhs = np.vdot(v.u0, final_data.u1) - np.vdot(v.u1, final_data.u0)
    back = evolve_homogeneous(final_data, P, -T, Nt)
    trace = normal_trace(back, P.grid).values[..., ::-1]
    times = np.linspace(0.0, T, Nt + 1)
    theta_f = window.endpoint_profile(times)[:, None, :] * f.values(times)
    w = trapezoid_weights(Nt, T / Nt)
    outward = -trace
    rhs = np.sum(w * outward * np.conj(theta_f))
    scale = np.sum(w * np.abs(outward) * np.abs(theta_f))
    res = abs(lhs - rhs)
    return DualityReport(complex(lhs), complex(rhs), float(res), float(res / scale) if scale else float(res))
