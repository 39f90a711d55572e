"""Observation maps, observability constants, HUM controls and the
time-derivative ellipticity check.

Observation uses the inward normal trace of forward solutions; control
uses the outward convention of the transposition identity, so the
control map carries an explicit sign flip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la

from waveobs.errors import (
    HypothesisViolation,
    IllPosedControlError,
    InvalidConfiguration,
)
from waveobs.evolution import (
    BoundaryData,
    evolve_homogeneous,
    evolve_inhomogeneous,
    first_order_matrix,
    fourier_basis,
    fourier_frequencies,
    normal_trace,
    trapezoid_weights,
)
from waveobs.operators import (
    GalerkinOperator,
    SystemCoefficients,
    assemble_P,
    assemble_P_adjoint,
)
from waveobs.spectral import VectorState, ks_norm, ks_pair_norm, laplacian_spectrum, pair_weights
from waveobs.trace_norms import PAD_FACTOR, TimeWindow, hs_time_norm, spectral_weights

SIGMA_FLOOR = 1e-13
CONTROL_FLOOR = 1e-10


def default_time_steps(M: int, T: float) -> int:
    """Enough samples to resolve the top mode's frequency M*pi comfortably."""
    n = int(np.ceil(8 * M * abs(T)))
    return max(256, n + n % 2)


def trace_rows(P: GalerkinOperator, dt: float, Nt: int) -> np.ndarray:
    """Inward traces of all unit initial data, shape (Nt+1, 2, N, 2NM).

    Entry [k, e, n, j] is the trace at endpoint e, component n, time
    ``k*dt`` of the solution started from the j-th flat unit vector.
    ``dt`` may be negative (backward solves).
    """
    N, M = P.N, P.M
    n = N * M
    W = P.grid.trace_weights()
    R = np.zeros((2, N, 2 * n), dtype=complex)
    for e in range(2):
        for c in range(N):
            R[e, c, c * M : (c + 1) * M] = W[e]
    R = R.reshape(2 * N, 2 * n)
    E = la.expm(first_order_matrix(P) * dt)
    out = np.empty((Nt + 1, 2 * N, 2 * n), dtype=complex)
    out[0] = R
    for k in range(Nt):
        out[k + 1] = out[k] @ E
    return out.reshape(Nt + 1, 2, N, 2 * n)


@dataclass(frozen=True)
class TraceSpectrum:
    """Padded DFT of windowed traces of unweighted unit data.

    ``spectrum`` has shape (2, N, L, 2NM); the observation map at any
    level s is obtained by reweighting rows and columns.
    """

    spectrum: np.ndarray = field(repr=False)
    dt: float
    n_samples: int
    N: int
    M: int
    window: TimeWindow
    T: float
    pad: int = PAD_FACTOR


def trace_spectrum(P: GalerkinOperator, window: TimeWindow, T: float, Nt: int, pad: int = PAD_FACTOR) -> TraceSpectrum:
    dt = T / Nt
    rows = trace_rows(P, dt, Nt)
    t = np.linspace(0.0, T, Nt + 1)
    theta = window.endpoint_profile(t)
    g = rows * theta.T[:, :, None, None]
    spec = np.fft.fft(g, n=pad * (Nt + 1), axis=0)
    spec = np.moveaxis(spec, 0, 2)
    return TraceSpectrum(spec, dt, Nt + 1, P.N, P.M, window, T, pad)


@dataclass(frozen=True)
class ObservationMap:
    """Weighted observation matrix ``(u0, u1) -> Theta d_nu u`` at level s."""

    matrix: np.ndarray = field(repr=False)
    s: float
    window: TimeWindow
    T: float
    singular_values: np.ndarray

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])


def observation_map_from_spectrum(ts: TraceSpectrum, s: float) -> ObservationMap:
    tw = spectral_weights(ts.n_samples, ts.dt, s, ts.pad)
    cw = 1.0 / np.sqrt(pair_weights(ts.N, ts.M, s))
    B = (ts.spectrum * tw[None, None, :, None] * cw).reshape(-1, cw.size)
    if ts.window.is_zero:
        sv = np.zeros(cw.size)
    else:
        sv = la.svdvals(B)
    return ObservationMap(B, float(s), ts.window, ts.T, sv)


def assemble_observation_map(
    P: GalerkinOperator,
    window: TimeWindow,
    s: float,
    T: float,
    Nt: int | None = None,
    pad: int = PAD_FACTOR,
) -> ObservationMap:
    """Observation map on data normalized in K^(s+1) x K^s, traces in H^s."""
    if Nt is None:
        Nt = default_time_steps(P.M, T)
    return observation_map_from_spectrum(trace_spectrum(P, window, T, Nt, pad), s)


def observability_constant(obs: ObservationMap) -> float:
    """``1 / sigma_min``; ``inf`` flags a (numerically) non-injective map."""
    smin = obs.sigma_min
    if smin < SIGMA_FLOOR:
        return float("inf")
    return 1.0 / smin


# -- control ----------------------------------------------------------------


def default_harmonics(M: int, T: float, Nt: int) -> int:
    K = max(int(np.ceil(M * T)), (M + 1) // 2)
    return min(K, Nt // 8)


def control_matrix(P: GalerkinOperator, window: TimeWindow, T: float, Nt: int, K: int) -> np.ndarray:
    """Matrix of f -> (v(T), v_t(T)) in flat state ordering.

    Columns follow ``BoundaryData.coeffs`` flattening (endpoint,
    component, basis index).  Built from backward solutions of the
    primal problem through the transposition identity.
    """
    N, M = P.N, P.M
    n = N * M
    dt = T / Nt
    back = trace_rows(P, -dt, Nt)[::-1]  # time-ordered samples t_0..t_Nt
    outward = -back
    t = np.linspace(0.0, T, Nt + 1)
    theta = window.endpoint_profile(t)
    basis = fourier_basis(K, T, t)
    w = trapezoid_weights(Nt, dt)
    kern = np.conj(outward) * (w * theta).T[:, :, None, None]
    # C[j, e, m, h] = sum_k kern[k, e, m, j] b_h(t_k)
    C = np.einsum("kemj,hk->jemh", kern, basis).reshape(2 * n, -1)
    # final data (0, e_i) gives v(T)_i; (-e_i, 0) gives v_t(T)_i
    return np.vstack([C[n:], -C[:n]])


@dataclass
class ControlProblem:
    """Steer zero data to ``target`` with boundary control ``Theta f``.

    ``target`` is a VectorState at level s - 1, i.e. measured in
    K^s x K^(s-1).
    """

    target: VectorState
    window: TimeWindow
    T: float
    s: float = 0.0
    control: BoundaryData | None = None
    error: float | None = None
    sigma_min: float | None = None
    control_norm: float | None = None


def control_weights(N: int, K: int, T: float, s: float) -> np.ndarray:
    w = (1.0 + fourier_frequencies(K, T) ** 2) ** s
    return np.tile(w, 2 * N)


def hum_control(
    problem: ControlProblem,
    P: GalerkinOperator,
    P_adj: GalerkinOperator,
    Nt: int,
    K: int | None = None,
    verify: bool = True,
) -> ControlProblem:
    """Minimal H^s-norm boundary control by SVD of the weighted control map.

    The achieved state is recomputed with :func:`evolve_inhomogeneous`
    (an independent solver) and the relative error stored on the problem.
    """
    T, s = problem.T, problem.s
    N, M = P.N, P.M
    if K is None:
        K = default_harmonics(M, T, Nt)
    Kmat = control_matrix(P, problem.window, T, Nt, K)
    wc = control_weights(N, K, T, s)
    wt = np.sqrt(pair_weights(N, M, s - 1.0))
    A = wt[:, None] * Kmat / np.sqrt(wc)[None, :]
    U, sv, Vh = la.svd(A, full_matrices=False)
    smin = float(sv[-1]) if sv.size else 0.0
    problem.sigma_min = smin
    if smin < CONTROL_FLOOR or sv.size < Kmat.shape[0]:
        raise IllPosedControlError(f"control map is not onto (sigma_min = {smin:.3e})")
    y = problem.target.flat() * wt
    c = (Vh.conj().T @ ((U.conj().T @ y) / sv)) / np.sqrt(wc)
    f = BoundaryData(c.reshape(2, N, 2 * K + 1), T)
    problem.control = f
    problem.control_norm = float(np.sqrt(np.sum(wc * np.abs(c) ** 2)))
    if verify:
        v = evolve_inhomogeneous(f, problem.window, P_adj, T, Nt).final_state()
        problem.error = relative_state_error(v.coeffs, problem.target)
    return problem


def relative_state_error(achieved, target: VectorState) -> float:
    diff = VectorState(np.asarray(achieved) - target.coeffs, target.s)
    ref = ks_pair_norm(target)
    err = ks_pair_norm(diff)
    return err / ref if ref > 0 else err


def adjoint_consistency(
    P: GalerkinOperator,
    P_adj: GalerkinOperator,
    window: TimeWindow,
    T: float,
    Nt: int,
    K: int,
    rng: np.random.Generator,
) -> float:
    """Relative gap between ``<K f, y>`` (forward solve) and ``<f, K^H y>`` (assembled matrix)."""
    N, M = P.N, P.M
    f = BoundaryData.random(rng, N, K, T)
    y = rng.standard_normal(2 * N * M) + 1j * rng.standard_normal(2 * N * M)
    Kf = evolve_inhomogeneous(f, window, P_adj, T, Nt).final_state().flat()
    Kmat = control_matrix(P, window, T, Nt, K)
    c = f.coeffs.reshape(-1)
    lhs = np.vdot(y, Kf)
    rhs = np.vdot(Kmat.conj().T @ y, c)
    scale = np.linalg.norm(Kf) * np.linalg.norm(y)
    return float(abs(lhs - rhs) / scale) if scale else float(abs(lhs - rhs))


# -- ellipticity of d_t on traces ---------------------------------------------


@dataclass
class EllipticityReport:
    lhs: np.ndarray
    rhs: np.ndarray
    ratios: np.ndarray
    M: int
    s: float
    r: int

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios)) if self.ratios.size else 0.0


def dt_ellipticity_check(
    states: Sequence[VectorState],
    P: GalerkinOperator,
    window: TimeWindow,
    s: float,
    r: int = 1,
    T: float | None = None,
    Nt: int | None = None,
) -> EllipticityReport:
    """Compare ``||Theta d_nu u||_{H^s}`` with the right-hand side of the estimate.

    ``d_t^{2r} d_nu u`` is the trace of the solution with data
    ``P^r (u0, u1)``, which is exact for the Galerkin system.  Zero states
    are skipped.
    """
    if not s > -1:
        raise HypothesisViolation(f"ellipticity estimate needs s > -1, got {s}")
    if r < 1:
        raise ValueError("r must be at least 1")
    T = window.T if T is None else T
    Nt = default_time_steps(P.M, T) if Nt is None else Nt
    Pr = P.power(r)
    lhs, rhs = [], []
    for st in states:
        if not np.any(st.coeffs):
            continue
        u = evolve_homogeneous(st, P, T, Nt)
        hi = VectorState.from_flat(
            np.concatenate([Pr @ st.u0.reshape(-1), Pr @ st.u1.reshape(-1)]), P.N, P.M
        )
        u_hi = evolve_homogeneous(hi, P, T, Nt)
        a = hs_time_norm(normal_trace(u, P.grid), s, window)
        b = (
            hs_time_norm(normal_trace(u_hi, P.grid), s - 2 * r, window)
            + ks_norm(st.u0, s + 0.5)
            + ks_norm(st.u1, s - 0.5)
        )
        lhs.append(a)
        rhs.append(b)
    lhs, rhs = np.array(lhs), np.array(rhs)
    return EllipticityReport(lhs, rhs, lhs / rhs if lhs.size else lhs, P.M, s, r)


def random_states(rng: np.random.Generator, N: int, modes: int, count: int, s: float = 0.0) -> list[VectorState]:
    """Random data on the first ``modes`` modes with unit K^(s+1) x K^s norm."""
    lam = (np.pi * np.arange(1, modes + 1)) ** 2
    out = []
    for _ in range(count):
        g = rng.standard_normal((2, N, modes)) + 1j * rng.standard_normal((2, N, modes))
        g[0] /= (1 + lam) ** ((s + 1) / 2)
        g[1] /= (1 + lam) ** (s / 2)
        st = VectorState(g, s)
        out.append(VectorState(g / ks_pair_norm(st), s))
    return out


def pad_state(state: VectorState, M: int) -> VectorState:
    c = np.zeros((2, state.N, M), dtype=complex)
    m = min(M, state.M)
    c[..., :m] = state.coeffs[..., :m]
    return VectorState(c, state.s)


def ellipticity_sweep(
    coeffs: SystemCoefficients,
    window: TimeWindow,
    s: float,
    r: int,
    M_list: Sequence[int],
    states: Sequence[VectorState],
    Nt: int | None = None,
) -> list[EllipticityReport]:
    out = []
    for M in M_list:
        P = assemble_P(coeffs, laplacian_spectrum(M))
        padded = [pad_state(st, M) for st in states]
        out.append(dt_ellipticity_check(padded, P, window, s, r, Nt=Nt))
    return out


# -- regularity shift --------------------------------------------------------


@dataclass(frozen=True)
class ShiftRow:
    s: float
    M: int
    window_id: str
    C_obs: float
    stable: bool


def refinement_stable(values: Sequence[float], tol: float) -> bool:
    """All successive ratios within ``1 +- tol`` (and all finite)."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return False
    return bool(np.all(np.abs(v[1:] / v[:-1] - 1.0) <= tol))


def observe_cells(
    coeffs: SystemCoefficients,
    windows: Sequence[tuple[str, TimeWindow]],
    s_list: Sequence[float],
    M_list: Sequence[int],
    T: float,
    Nt: Callable[[int], int] | int | None = None,
    mapper: Callable = map,
) -> dict[tuple[str, int], list[tuple[float, float]]]:
    """``(window_id, M) -> [(sigma_min, C_obs) per s]``; one propagation per cell.

    ``mapper`` may be an executor's ``map`` to spread cells over workers;
    results are keyed, so output order never depends on scheduling.
    """
    cells = [(wid, win, M) for wid, win in windows for M in M_list]

    def run(cell):
        wid, win, M = cell
        steps = Nt(M) if callable(Nt) else (Nt or default_time_steps(M, T))
        P = assemble_P(coeffs, laplacian_spectrum(M))
        ts = trace_spectrum(P, win, T, steps)
        out = []
        for s in s_list:
            obs = observation_map_from_spectrum(ts, s)
            out.append((obs.sigma_min, observability_constant(obs)))
        return out

    results = list(mapper(run, cells))
    return {(wid, M): res for (wid, _, M), res in zip(cells, results)}


def regularity_shift_experiment(
    coeffs: SystemCoefficients,
    window: TimeWindow,
    s_list: Sequence[float],
    M_list: Sequence[int],
    T: float,
    window2: TimeWindow | None = None,
    Nt: Callable[[int], int] | int | None = None,
    tol: float = 0.10,
    mapper: Callable = map,
) -> list[ShiftRow]:
    """C_obs over an s x M grid for one window, plus an enlarged window.

    Rows with ``window_id = "theta1"`` use the given window at every level
    (the increasing direction); ``"theta2"`` rows use the enlarged window
    (the decreasing direction).  Stability is per (s, window) across M.
    """
    if list(M_list) != sorted(set(M_list)):
        raise InvalidConfiguration("M_list must be strictly increasing")
    windows = [("theta1", window)]
    if window2 is not None:
        if not window2.contains(window):
            raise InvalidConfiguration("second window must be positive on the support of the first")
        windows.append(("theta2", window2))
    cells = observe_cells(coeffs, windows, s_list, M_list, T, Nt, mapper)
    rows = []
    for wid, _ in windows:
        for i, s in enumerate(s_list):
            vals = [cells[(wid, M)][i][1] for M in M_list]
            stable = refinement_stable(vals, tol)
            rows.extend(ShiftRow(float(s), int(M), wid, float(C), stable) for M, C in zip(M_list, vals))
    return rows


def shift_implications(rows: Sequence[ShiftRow]) -> dict[str, bool]:
    """Check the two directions of the shift statement on a finished table.

    ``increasing``: stable at s1 implies stable at every s2 > s1 (same
    window).  ``decreasing``: stable at s1 with theta1 implies stable at
    every s2 < s1 with theta2 (vacuously true without theta2 rows).
    """
    stab = {(r.window_id, r.s): r.stable for r in rows}
    levels = sorted({r.s for r in rows})
    inc = all(
        stab[("theta1", b)]
        for a in levels
        for b in levels
        if b > a and stab[("theta1", a)]
    )
    has2 = any(r.window_id == "theta2" for r in rows)
    dec = True
    if has2:
        dec = all(
            stab[("theta2", b)]
            for a in levels
            for b in levels
            if b < a and stab[("theta1", a)]
        )
    return {"increasing": inc, "decreasing": dec}


def operators_for(coeffs: SystemCoefficients, M: int) -> tuple[GalerkinOperator, GalerkinOperator]:
    g = laplacian_spectrum(M)
    return assemble_P(coeffs, g), assemble_P_adjoint(coeffs, g)
