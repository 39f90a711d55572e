"""Half-space symbols near the boundary and quadratures of their identities.

With a flat tangential metric ``|xi'|^2 = alpha xi'^2`` the wave symbol
splits as ``p = xi_n^2 + rho`` with ``rho = -tau^2 + alpha xi'^2``.  The
cutoffs below localize to the region where ``rho`` dominates
``1 + tau^2 + |xi'|^2`` (P elliptic) and its complement (d_t elliptic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from waveobs import _smooth
from waveobs.errors import QuadratureError

CHI_LOW, CHI_HIGH = 0.2, 0.25
THETA_LOW, THETA_HIGH = 0.1, 0.2
QUAD_RTOL = 1e-13


@dataclass(frozen=True)
class SymbolPoint:
    tau: float
    xi: float
    alpha: float = 1.0
    xi_n: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("metric coefficient alpha must be positive")

    @property
    def tangential(self) -> float:
        return self.alpha * self.xi**2

    @property
    def rho(self) -> float:
        return -self.tau**2 + self.tangential

    @property
    def p(self) -> float:
        return self.xi_n**2 + self.rho


def chi0(z):
    """0 on (-inf, 1/5], 1 on [1/4, inf), smooth in between."""
    return _smooth.ramp_down((CHI_HIGH - np.asarray(z, dtype=float)) / (CHI_HIGH - CHI_LOW))


def theta(z):
    """0 on (-inf, 1/10], 1 on [1/5, inf), smooth in between."""
    return _smooth.ramp_down((THETA_HIGH - np.asarray(z, dtype=float)) / (THETA_HIGH - THETA_LOW))


def chi(pt: SymbolPoint) -> float:
    return float(chi0(pt.rho / (1.0 + pt.tau**2 + pt.tangential)))


def chi_tilde(pt: SymbolPoint) -> float:
    return float(theta(pt.p / (1.0 + pt.xi_n**2 + pt.tangential + pt.tau**2)))


def chi_low(pt: SymbolPoint) -> float:
    """Compactly supported cutoff, 1 where ``tau^2 + |xi'|^2 <= 1``, 0 beyond 2."""
    return float(_smooth.ramp_down(pt.tau**2 + pt.tangential - 1.0))


def _level_crossing(c: float, rho: float, rest: float) -> float:
    """|xi_n| at which ``(xi_n^2 + rho)/(xi_n^2 + rest) = c`` (0 if already above)."""
    x2 = (c * rest - rho) / (1.0 - c)
    return float(np.sqrt(x2)) if x2 > 0 else 0.0


def _quad(f, a, b, **kw) -> float:
    val, err, *_ = integrate.quad(f, a, b, epsabs=0.0, epsrel=QUAD_RTOL, limit=500, full_output=1, **kw)
    if not np.isfinite(val) or err > 1e-10 * max(1.0, abs(val)):
        raise QuadratureError(f"quadrature error estimate {err:.2e} too large on [{a}, {b}]")
    return float(val)


def q_tangential(tau: float, xi: float, alpha: float = 1.0) -> float:
    """``int_R chi_tilde / (xi_n^2 + rho) d xi_n`` by adaptive quadrature.

    The integrand vanishes until ``chi_tilde`` switches on, so the
    integral is split at the two level crossings of its argument.
    """
    pt = SymbolPoint(tau, xi, alpha)
    rho = pt.rho
    rest = 1.0 + pt.tangential + tau**2
    a = _level_crossing(THETA_LOW, rho, rest)
    b = _level_crossing(THETA_HIGH, rho, rest)

    def f(x):
        return chi_tilde(SymbolPoint(tau, xi, alpha, x)) / (x * x + rho)

    total = 0.0
    if b > a:
        total += _quad(f, a, b)
    total += _quad(lambda x: 1.0 / (x * x + rho), b, np.inf)
    return 2.0 * total


def _g(s, sp):
    return (s * s + sp) / (s * s + 1.0)


def F_direct(sp: float) -> float:
    """``int_R theta(g(s)) / (s^2 + sp) ds`` with ``g = (s^2 + sp)/(s^2 + 1)``."""
    if not sp < 1:
        raise ValueError("need sigma' < 1")
    a = _level_crossing(THETA_LOW, sp, 1.0)
    b = _level_crossing(THETA_HIGH, sp, 1.0)
    total = 0.0
    if b > a:
        total += _quad(lambda s: float(theta(_g(s, sp))) / (s * s + sp), a, b)
    total += _quad(lambda s: 1.0 / (s * s + sp), b, np.inf)
    return 2.0 * total


def F_bounded(sp: float) -> float:
    """``int_{sp}^1 theta(s) / (s sqrt(1-s) sqrt(s-sp)) ds`` with algebraic endpoint weights."""
    if not sp < 1:
        raise ValueError("need sigma' < 1")
    if sp >= THETA_LOW:
        return _quad(lambda s: float(theta(s)) / s, sp, 1.0, weight="alg", wvar=(-0.5, -0.5))
    # theta vanishes below 1/10, so the sqrt(s - sp) factor is smooth there
    return _quad(
        lambda s: float(theta(s)) / (s * np.sqrt(s - sp)),
        THETA_LOW,
        1.0,
        weight="alg",
        wvar=(0.0, -0.5),
    )


def F_unit(sp: float) -> float:
    """Unit-interval form after ``s = sin^2(phi)``, which removes both endpoint singularities."""
    if not sp < 1:
        raise ValueError("need sigma' < 1")

    def f(phi):
        z = sp + (1.0 - sp) * np.sin(phi) ** 2
        return 2.0 * float(theta(z)) / z

    pts = []
    for c in (THETA_LOW, THETA_HIGH):
        u = (c - sp) / (1.0 - sp)
        if 0.0 < u < 1.0:
            pts.append(float(np.arcsin(np.sqrt(u))))
    return _quad(f, 0.0, np.pi / 2, points=pts or None)


def F_representations(sp: float) -> dict[str, float]:
    return {"direct": F_direct(sp), "bounded": F_bounded(sp), "unit": F_unit(sp)}


def sample_elliptic_points(rng: np.random.Generator, count: int, scale: float = 50.0, alpha_range=(0.5, 2.0)):
    """Random points with ``chi > 0`` (so q_tangential reduces to pi/sqrt(rho))."""
    out = []
    while len(out) < count:
        alpha = rng.uniform(*alpha_range)
        xi = rng.uniform(-scale, scale)
        tau = rng.uniform(-scale, scale)
        pt = SymbolPoint(tau, xi, alpha)
        if chi(pt) > 0 and pt.rho > 0:
            out.append(pt)
    return out


def sample_support_points(rng: np.random.Generator, count: int, scale: float = 30.0, alpha_range=(0.5, 2.0)):
    """Random points in the support of ``(1 - chi_low)(1 - chi)``."""
    out = []
    while len(out) < count:
        alpha = rng.uniform(*alpha_range)
        pt = SymbolPoint(rng.uniform(-scale, scale), rng.uniform(-scale, scale), alpha)
        if (1.0 - chi_low(pt)) * (1.0 - chi(pt)) > 0:
            out.append(pt)
    return out


def support_inequality_holds(pt: SymbolPoint) -> bool:
    """``7 tau^2 > 1 + |xi'|^2``: d_t dominates on the complement of the elliptic zone."""
    return 7.0 * pt.tau**2 > 1.0 + pt.tangential
