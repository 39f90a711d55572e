"""Invariant suite behind the ``verify`` subcommand.

Each check returns a :class:`CheckResult`; the suite is a plain list so
the CLI can emit one CSV row per check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from waveobs.evolution import BoundaryData, duality_check, evolve_homogeneous
from waveobs.operators import (
    SystemCoefficients,
    assemble_P,
    assemble_P_adjoint,
    choose_mu,
    sigma_min_shift,
)
from waveobs.spectral import VectorState, laplacian_spectrum
from waveobs.symbols import (
    F_representations,
    chi,
    q_tangential,
    sample_elliptic_points,
    sample_support_points,
    support_inequality_holds,
)
from waveobs.trace_norms import make_window


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


def _random_coeffs(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_adjoint(families, M: int, pairs: int, rng, tol: float = 1e-8) -> CheckResult:
    worst = 0.0
    for c in families:
        g = laplacian_spectrum(M)
        P, Pa = assemble_P(c, g), assemble_P_adjoint(c, g)
        n = c.N * M
        for _ in range(pairs):
            u, v = _random_coeffs(rng, n), _random_coeffs(rng, n)
            gap = abs(np.vdot(v, P.matrix @ u) - np.vdot(Pa.matrix @ v, u))
            worst = max(worst, gap / (np.linalg.norm(u) * np.linalg.norm(v)))
    names = ",".join(c.name for c in families)
    return CheckResult("adjoint_identity", worst, tol, worst <= tol, names)


def check_mu(coeffs: SystemCoefficients, M_list, mu: float | None = None) -> CheckResult:
    ops = [assemble_P(coeffs, laplacian_spectrum(M)) for M in M_list]
    mu = choose_mu(ops) if mu is None else float(mu)
    margin = min(sigma_min_shift(P, mu) / mu for P in ops)
    return CheckResult("shift_certification", margin, 0.5, margin >= 0.5, f"mu={mu:g}")


def check_conservation(N: int, M: int, T: float, Nt: int, rng) -> list[CheckResult]:
    P = assemble_P(SystemCoefficients.zero(N), laplacian_spectrum(M))
    st = VectorState(_random_coeffs(rng, (2, N, M)))
    traj = evolve_homogeneous(st, P, T, Nt)
    e = traj.energies()
    drift = float(np.max(np.abs(e - e[0])) / e[0])
    back = evolve_homogeneous(traj.final_state(), P, -T, Nt).final_state()
    rt = float(np.linalg.norm(back.coeffs - st.coeffs) / np.linalg.norm(st.coeffs))
    return [
        CheckResult("energy_conservation", drift, 1e-9, drift <= 1e-9),
        CheckResult("time_reversibility", rt, 1e-10, rt <= 1e-10),
    ]


def check_duality(coeffs: SystemCoefficients, M: int, T: float, Nt: int, trials: int, rng, tol: float = 1e-5) -> CheckResult:
    g = laplacian_spectrum(M)
    P, Pa = assemble_P(coeffs, g), assemble_P_adjoint(coeffs, g)
    win = make_window(T, 0.05 * T, 0.95 * T, 0.5)
    K = max(1, min(Nt // 8, M))
    worst = 0.0
    for _ in range(trials):
        f = BoundaryData.random(rng, coeffs.N, K, T)
        st = VectorState(_random_coeffs(rng, (2, coeffs.N, M)))
        worst = max(worst, duality_check(st, f, win, P, Pa, T, Nt).relative)
    return CheckResult("duality_identity", worst, tol, worst <= tol, coeffs.name)


def check_symbols(rng, n_points: int = 100, n_sigma: int = 50, n_support: int = 10_000) -> list[CheckResult]:
    worst_q = 0.0
    for pt in sample_elliptic_points(rng, n_points):
        c = chi(pt)
        worst_q = max(worst_q, abs(q_tangential(pt.tau, pt.xi, pt.alpha) * c - np.pi * c / np.sqrt(pt.rho)))
    worst_f = 0.0
    for sp in np.linspace(-1.0, 0.9, n_sigma):
        vals = list(F_representations(float(sp)).values())
        worst_f = max(worst_f, max(vals) - min(vals))
    pts = sample_support_points(rng, n_support)
    bad = sum(not support_inequality_holds(p) for p in pts)
    return [
        CheckResult("q_tangential_identity", worst_q, 1e-9, worst_q <= 1e-9),
        CheckResult("F_representations", worst_f, 1e-8, worst_f <= 1e-8),
        CheckResult("support_inequality", float(bad), 0.0, bad == 0, f"{len(pts)} points"),
    ]
