"""Galerkin matrices for P = Laplacian - X d/dx - q and its adjoint.

Flat index convention: component ``n`` and mode ``k`` (1-based) sit at
``n * M + (k - 1)``.  Matrix entries are ``<P(e_m phi_k), e_n phi_j>`` in
L2(0, 1), so with the orthonormal basis the L2-adjoint of a Galerkin
matrix is its conjugate transpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as la

from waveobs.errors import NoCertifiedMuError, NumericalSingularityError
from waveobs.spectral import SpectralGrid, ks_norm

MatrixField = Callable[[np.ndarray], np.ndarray]


def _constant_field(mat) -> MatrixField:
    mat = np.asarray(mat, dtype=complex)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(mat, x.shape + mat.shape).copy()

    return f


def _finite_difference(f: MatrixField, h: float = 1e-3) -> MatrixField:
    # Fourth-order central stencil; callables must accept x slightly outside [0, 1].
    def df(x):
        x = np.asarray(x, dtype=float)
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)

    return df


@dataclass(frozen=True)
class SystemCoefficients:
    """Matrix fields X(x) (first-order coupling) and q(x) (potential).

    ``X`` and ``q`` map an array of points of shape (Q,) to (Q, N, N).
    ``dX`` is the x-derivative of ``X``; it is only used by the literal
    adjoint assembly and falls back to a finite-difference stencil.
    """

    N: int
    X: MatrixField
    q: MatrixField
    dX: MatrixField | None = None
    name: str = "custom"
    constant_q: bool = field(default=False, compare=False)

    def sample(self, x) -> tuple[np.ndarray, np.ndarray]:
        Xs = np.asarray(self.X(x), dtype=complex)
        qs = np.asarray(self.q(x), dtype=complex)
        shape = (np.size(x), self.N, self.N)
        if Xs.shape != shape or qs.shape != shape:
            raise ValueError(f"coefficient fields must return shape {shape}")
        if not (np.all(np.isfinite(Xs)) and np.all(np.isfinite(qs))):
            raise ValueError("coefficient fields are not finite at the sample points")
        return Xs, qs

    def sample_dX(self, x) -> np.ndarray:
        d = self.dX if self.dX is not None else _finite_difference(self.X)
        return np.asarray(d(x), dtype=complex)

    @property
    def preserves_span(self) -> bool:
        """True when P maps the sine span into itself (X = 0, q constant)."""
        return self.constant_q

    # -- built-in families -------------------------------------------------

    @classmethod
    def zero(cls, N: int = 1) -> SystemCoefficients:
        z = np.zeros((N, N))
        return cls(N, _constant_field(z), _constant_field(z), _constant_field(z), "zero", True)

    @classmethod
    def from_constant(cls, q=None, X=None, name: str = "constant") -> SystemCoefficients:
        mats = [np.atleast_2d(np.asarray(m, dtype=complex)) for m in (q, X) if m is not None]
        if not mats:
            raise ValueError("need at least one of q, X")
        N = mats[0].shape[0]
        qm = np.zeros((N, N), complex) if q is None else np.atleast_2d(np.asarray(q, dtype=complex))
        Xm = np.zeros((N, N), complex) if X is None else np.atleast_2d(np.asarray(X, dtype=complex))
        if qm.shape != (N, N) or Xm.shape != (N, N):
            raise ValueError("q and X must be square and of equal size")
        return cls(
            N,
            _constant_field(Xm),
            _constant_field(qm),
            _constant_field(np.zeros((N, N))),
            name,
            bool(np.all(Xm == 0)),
        )

    @classmethod
    def constant_potential(cls, c: float, N: int = 1) -> SystemCoefficients:
        return cls.from_constant(q=c * np.eye(N), name="constant-q")

    @classmethod
    def constant_drift(cls, c: float, N: int = 1) -> SystemCoefficients:
        return cls.from_constant(X=c * np.eye(N), name="constant-X")

    @classmethod
    def rotation_coupling(cls, strength: float = 1.0, N: int = 2) -> SystemCoefficients:
        """Constant skew coupling ``q = strength * J`` with J the cyclic rotation generator."""
        J = np.zeros((N, N))
        for n in range(N):
            J[n, (n + 1) % N] += 1.0
            J[(n + 1) % N, n] -= 1.0
        if N == 1:
            J[:] = 0.0
        return cls.from_constant(q=strength * J, name="rotation-coupling")

    @classmethod
    def nilpotent_coupling(cls, strength: float = 100.0) -> SystemCoefficients:
        return cls.from_constant(q=[[0.0, strength], [0.0, 0.0]], name="nilpotent")

    @classmethod
    def random_smooth(
        cls, N: int, rng: np.random.Generator, scale: float = 1.0, modes: int = 3, drift: bool = True
    ) -> SystemCoefficients:
        """Random trigonometric-polynomial fields ``sum_m A_m cos(m pi x)``."""

        def draw():
            return scale * (rng.standard_normal((modes, N, N)) + 1j * rng.standard_normal((modes, N, N)))

        Aq = draw()
        AX = draw() if drift else np.zeros((modes, N, N), complex)
        m = np.arange(modes)

        def field_(A):
            def f(x):
                c = np.cos(np.pi * np.multiply.outer(np.asarray(x, float), m))
                return np.einsum("qm,mab->qab", c, A)

            return f

        def dfield(A):
            def f(x):
                s = -np.pi * m * np.sin(np.pi * np.multiply.outer(np.asarray(x, float), m))
                return np.einsum("qm,mab->qab", s, A)

            return f

        return cls(N, field_(AX), field_(Aq), dfield(AX), "random-smooth", False)


@dataclass(frozen=True)
class GalerkinOperator:
    matrix: np.ndarray
    grid: SpectralGrid = field(repr=False)
    flavor: str
    coeffs: SystemCoefficients | None = field(default=None, repr=False)
    mu: float | None = None

    @property
    def N(self) -> int:
        return self.matrix.shape[0] // self.grid.M

    @property
    def M(self) -> int:
        return self.grid.M

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v)
        return (self.matrix @ v.reshape(self.matrix.shape[0], -1)).reshape(v.shape)

    def power(self, r: int) -> np.ndarray:
        return np.linalg.matrix_power(self.matrix, r)


def _check(coeffs: SystemCoefficients, grid: SpectralGrid):
    if not isinstance(grid, SpectralGrid):
        raise ValueError("grid must be a SpectralGrid")
    if coeffs.N < 1:
        raise ValueError("component count must be positive")


def _laplacian_block(grid: SpectralGrid, N: int) -> np.ndarray:
    return -np.kron(np.eye(N), np.diag(grid.eigenvalues))


def assemble_P(coeffs: SystemCoefficients, grid: SpectralGrid) -> GalerkinOperator:
    """Galerkin matrix of P = Laplacian - X d/dx - q."""
    _check(coeffs, grid)
    N, M = coeffs.N, grid.M
    Xs, qs = coeffs.sample(grid.quad_nodes)
    B, D, w = grid.basis_eval, grid.basis_deriv, grid.quad_weights
    # first-order and potential parts, indexed [n, j, m, k]
    blk = np.einsum("jx,x,xnm,kx->njmk", B, w, Xs, D, optimize=True)
    blk += np.einsum("jx,x,xnm,kx->njmk", B, w, qs, B, optimize=True)
    mat = _laplacian_block(grid, N) - blk.reshape(N * M, N * M)
    return GalerkinOperator(mat, grid, "P", coeffs)


def assemble_P_adjoint(coeffs: SystemCoefficients, grid: SpectralGrid) -> GalerkinOperator:
    """Galerkin matrix of P* = Laplacian - X* - q* from the adjoint formula.

    ``(X* v)_l = -sum_k conj(X_kl) v_k' - sum_k conj(X_kl)' v_k`` and
    ``q* = q^H``; the derivative of X enters explicitly here.
    """
    _check(coeffs, grid)
    N, M = coeffs.N, grid.M
    x = grid.quad_nodes
    Xs, qs = coeffs.sample(x)
    dXs = coeffs.sample_dX(x)
    # adjoint-side fields indexed [x, n, m] = conj(F_mn)
    Xh = np.conj(np.swapaxes(Xs, 1, 2))
    dXh = np.conj(np.swapaxes(dXs, 1, 2))
    qh = np.conj(np.swapaxes(qs, 1, 2))
    B, D, w = grid.basis_eval, grid.basis_deriv, grid.quad_weights
    Xstar = -np.einsum("jx,x,xnm,kx->njmk", B, w, Xh, D, optimize=True)
    Xstar -= np.einsum("jx,x,xnm,kx->njmk", B, w, dXh, B, optimize=True)
    qstar = np.einsum("jx,x,xnm,kx->njmk", B, w, qh, B, optimize=True)
    mat = _laplacian_block(grid, N) - (Xstar + qstar).reshape(N * M, N * M)
    return GalerkinOperator(mat, grid, "P_adjoint", coeffs)


def sigma_min_shift(P: GalerkinOperator, mu: float) -> float:
    n = P.matrix.shape[0]
    return float(la.svdvals(P.matrix + 1j * mu * np.eye(n))[-1])


def choose_mu(
    operators: GalerkinOperator | Sequence[GalerkinOperator],
    mu0: float = 1.0,
    mu_max: float = 1e6,
) -> float:
    """Smallest doubling candidate from which the shift is certified on the whole ladder.

    Candidates are ``mu0 * 2^j <= mu_max``.  A candidate passes when
    ``sigma_min(P_M + i mu I) >= mu / 2`` for every operator; the returned
    value is the first candidate such that it and all larger candidates
    pass, so the bound is not an accident of the low-mode spectral gap.
    """
    if isinstance(operators, GalerkinOperator):
        operators = [operators]
    operators = list(operators)
    ladder = []
    mu = float(mu0)
    while mu <= mu_max:
        ladder.append(mu)
        mu *= 2.0
    passed = [all(sigma_min_shift(P, m) >= 0.5 * m for P in operators) for m in ladder]
    if not ladder or not passed[-1]:
        raise NoCertifiedMuError(f"no certified shift below mu_max={mu_max:g}")
    j = len(ladder) - 1
    while j > 0 and passed[j - 1]:
        j -= 1
    return ladder[j]


def shift_operator(P: GalerkinOperator, mu: float) -> GalerkinOperator:
    n = P.matrix.shape[0]
    return GalerkinOperator(P.matrix + 1j * mu * np.eye(n), P.grid, "shift", P.coeffs, mu)


def shift_apply(v, mu: float, r: int, P: GalerkinOperator) -> np.ndarray:
    """Apply ``(P + i mu)^r`` to a coefficient array of N*M entries (any shape)."""
    if r < 0:
        raise ValueError("power must be nonnegative")
    v = np.asarray(v, dtype=complex)
    S = P.matrix + 1j * mu * np.eye(P.matrix.shape[0])
    out = v.reshape(S.shape[0], -1)
    for _ in range(r):
        out = S @ out
    return out.reshape(v.shape)


def shift_invert(v, mu: float, r: int, P: GalerkinOperator) -> np.ndarray:
    """Apply ``(P + i mu)^(-r)`` by repeated LU solves."""
    if r < 0:
        raise ValueError("power must be nonnegative")
    v = np.asarray(v, dtype=complex)
    S = P.matrix + 1j * mu * np.eye(P.matrix.shape[0])
    out = v.reshape(S.shape[0], -1)
    if r == 0:
        return out.reshape(v.shape).copy()
    try:
        with np.errstate(all="raise"):
            lu = la.lu_factor(S, check_finite=True)
    except (la.LinAlgError, FloatingPointError) as exc:
        raise NumericalSingularityError(str(exc)) from exc
    piv = np.abs(np.diag(lu[0]))
    if piv.min() <= S.shape[0] * np.finfo(float).eps * piv.max():
        raise NumericalSingularityError("shift matrix is numerically singular")
    for _ in range(r):
        out = la.lu_solve(lu, out)
    if not np.all(np.isfinite(out)):
        raise NumericalSingularityError("non-finite result in shift inversion")
    return out.reshape(v.shape)


@dataclass
class EllipticReport:
    max_ratio: float
    ratios: np.ndarray


def elliptic_estimate_check(
    P: GalerkinOperator,
    s: float,
    r: int,
    trials: int = 20,
    rng: np.random.Generator | None = None,
    states: Iterable[np.ndarray] | None = None,
) -> EllipticReport:
    """Ratio ``|u|_{s+r} / (|P^r u|_{s-r} + |u|_{s+r-1})`` over random states.

    Zero states are skipped.  ``states`` may supply explicit (N, M) arrays.
    """
    if r < 1:
        raise ValueError("r must be a positive integer")
    N, M = P.N, P.M
    if states is None:
        rng = np.random.default_rng() if rng is None else rng
        states = [
            rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M)) for _ in range(trials)
        ]
    Pr = P.power(r)
    ratios = []
    for u in states:
        u = np.asarray(u, dtype=complex).reshape(N, M)
        if not np.any(u):
            continue
        Pu = (Pr @ u.reshape(-1)).reshape(N, M)
        num = ks_norm(u, s + r)
        den = ks_norm(Pu, s - r) + ks_norm(u, s + r - 1)
        ratios.append(num / den)
    ratios = np.asarray(ratios)
    return EllipticReport(float(ratios.max()) if ratios.size else float("nan"), ratios)
