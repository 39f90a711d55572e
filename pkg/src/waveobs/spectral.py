"""Dirichlet sine basis on [0, 1] and the (1 + lambda_k)^s weighted norms.

Coefficient arrays keep the mode index on the last axis, so a single
component is a length-M vector and an N-component field is (N, M).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpectralGrid:
    """Truncated Dirichlet eigenbasis ``sqrt(2) sin(k pi x)``, k = 1..M.

    Attributes
    ----------
    M : int
        Number of retained modes.
    eigenvalues : ndarray, shape (M,)
        ``(k pi)^2``, i.e. eigenvalues of ``-d^2/dx^2`` with Dirichlet
        conditions.
    quad_nodes, quad_weights : ndarray, shape (Q,)
        Gauss-Legendre rule mapped to [0, 1], ``Q = 4M + 32``.
    basis_eval, basis_deriv : ndarray, shape (M, Q)
        Basis functions and their x-derivatives at the nodes.
    """

    M: int
    eigenvalues: np.ndarray = field(repr=False)
    quad_nodes: np.ndarray = field(repr=False)
    quad_weights: np.ndarray = field(repr=False)
    basis_eval: np.ndarray = field(repr=False)
    basis_deriv: np.ndarray = field(repr=False)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.pi * np.arange(1, self.M + 1)

    @property
    def Q(self) -> int:
        return self.quad_nodes.size

    def gram(self) -> np.ndarray:
        return (self.basis_eval * self.quad_weights) @ self.basis_eval.T

    def synthesize(self, coeffs, x=None) -> np.ndarray:
        """Evaluate ``sum_k a_k phi_k`` at the quadrature nodes (or at ``x``)."""
        coeffs = np.asarray(coeffs)
        if x is None:
            basis = self.basis_eval
        else:
            basis = basis_values(self.M, np.asarray(x, dtype=float))
        return coeffs @ basis

    def project(self, values) -> np.ndarray:
        """L2 projection of nodal values onto the basis."""
        return np.asarray(values) @ (self.basis_eval * self.quad_weights).T

    def trace_weights(self) -> np.ndarray:
        """Inward normal derivative of each basis function, shape (2, M).

        Row 0 is ``+d/dx`` at x = 0, row 1 is ``-d/dx`` at x = 1.
        """
        k = np.arange(1, self.M + 1)
        d0 = np.sqrt(2.0) * np.pi * k
        d1 = d0 * (-1.0) ** (k + 1)
        return np.vstack([d0, d1])


def basis_values(M: int, x: np.ndarray) -> np.ndarray:
    k = np.arange(1, M + 1)
    return np.sqrt(2.0) * np.sin(np.pi * np.outer(k, x))


def laplacian_spectrum(M: int, quad_points: int | None = None) -> SpectralGrid:
    """Build the Dirichlet spectral grid with ``M`` modes."""
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise ValueError(f"mode count must be a positive integer, got {M!r}")
    M = int(M)
    Q = 4 * M + 32 if quad_points is None else int(quad_points)
    if Q < 4 * M:
        raise ValueError("need at least 4M quadrature points")
    x, w = np.polynomial.legendre.leggauss(Q)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    k = np.arange(1, M + 1)
    kpi = np.pi * k
    basis = np.sqrt(2.0) * np.sin(np.outer(kpi, x))
    deriv = np.sqrt(2.0) * kpi[:, None] * np.cos(np.outer(kpi, x))
    for arr in (x, w, basis, deriv):
        arr.setflags(write=False)
    eig = kpi**2
    eig.setflags(write=False)
    return SpectralGrid(M, eig, x, w, basis, deriv)


def ks_weights(M: int, s: float) -> np.ndarray:
    """Weights ``(1 + (k pi)^2)^s`` for k = 1..M."""
    lam = (np.pi * np.arange(1, M + 1)) ** 2
    return (1.0 + lam) ** s


def ks_norm(coeffs, s: float) -> float:
    """K^s norm ``(sum_k (1 + lambda_k)^s |a_k|^2)^(1/2)``.

    Leading axes (components) are summed over, so the same call serves a
    single component or a whole (N, M) field.
    """
    a = np.asarray(coeffs)
    if not np.isfinite(s):
        raise ValueError("Sobolev index must be finite")
    if not np.all(np.isfinite(a)):
        raise ValueError("coefficients must be finite")
    if a.ndim == 0:
        a = a.reshape(1)
    w = ks_weights(a.shape[-1], s)
    return float(np.sqrt(np.sum(w * np.abs(a) ** 2)))


@dataclass(frozen=True)
class VectorState:
    """Initial data (u0, u1) as spectral coefficients of shape (2, N, M).

    ``s`` is the level: u0 is measured in K^(s+1) and u1 in K^s.
    """

    coeffs: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[0] != 2:
            raise ValueError(f"state coefficients must have shape (2, N, M), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("state coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_pair(cls, u0, u1, s: float = 0.0) -> VectorState:
        u0 = np.atleast_2d(np.asarray(u0, dtype=complex))
        u1 = np.atleast_2d(np.asarray(u1, dtype=complex))
        return cls(np.stack([u0, u1]), s)

    @classmethod
    def from_flat(cls, y, N: int, M: int, s: float = 0.0) -> VectorState:
        return cls(np.asarray(y, dtype=complex).reshape(2, N, M), s)

    @classmethod
    def zeros(cls, N: int, M: int, s: float = 0.0) -> VectorState:
        return cls(np.zeros((2, N, M), dtype=complex), s)

    @property
    def u0(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def u1(self) -> np.ndarray:
        return self.coeffs[1]

    @property
    def N(self) -> int:
        return self.coeffs.shape[1]

    @property
    def M(self) -> int:
        return self.coeffs.shape[2]

    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def energy(self) -> float:
        """``||d_x u||^2 + ||u_t||^2`` of the free wave with these data."""
        lam = (np.pi * np.arange(1, self.M + 1)) ** 2
        return float(np.sum(lam * np.abs(self.u0) ** 2) + np.sum(np.abs(self.u1) ** 2))


def ks_pair_norm(state: VectorState) -> float:
    """Norm of (u0, u1) in K^(s+1) x K^s."""
    a = ks_norm(state.u0, state.s + 1.0)
    b = ks_norm(state.u1, state.s)
    return float(np.hypot(a, b))


def pair_weights(N: int, M: int, s: float) -> np.ndarray:
    """Flat weights for K^(s+1) x K^s, matching ``VectorState.flat`` ordering."""
    w0 = np.tile(ks_weights(M, s + 1.0), N)
    w1 = np.tile(ks_weights(M, s), N)
    return np.concatenate([w0, w1])
