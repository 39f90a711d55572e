"""C-infinity transition functions shared by time windows and symbol cutoffs."""

import numpy as np


def _flatten(r):
    # exp(1 - 1/r): flat at r = 0, equals 1 at r = 1 with unit slope.
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = np.exp(1.0 - 1.0 / r[pos])
    return out


def bump(r):
    """Classic bump exp(1 - 1/(1 - r^2)) on |r| < 1, zero elsewhere."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    h = 1.0 - r[inside] ** 2
    with np.errstate(under="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / h)
    return out


def ramp_down(r):
    """Smooth step equal to 1 for r <= 0 and 0 for r >= 1.

    The bump profile is composed with ``exp(1 - 1/r)`` so that every
    derivative vanishes at both junctions.
    """
    r = np.asarray(r, dtype=float)
    out = np.where(r <= 0.0, 1.0, 0.0)
    mid = (r > 0.0) & (r < 1.0)
    rho = _flatten(r[mid])
    h = 1.0 - rho**2
    with np.errstate(under="ignore", divide="ignore"):
        out[mid] = np.where(h > 0, np.exp(1.0 - 1.0 / np.where(h > 0, h, 1.0)), 0.0)
    return out


def ramp_down_derivatives(r):
    """Return (value, d/dr, d^2/dr^2) of :func:`ramp_down`."""
    r = np.asarray(r, dtype=float)
    val = np.where(r <= 0.0, 1.0, 0.0)
    d1 = np.zeros_like(r)
    d2 = np.zeros_like(r)
    mid = (r > 0.0) & (r < 1.0)
    rm = r[mid]
    with np.errstate(under="ignore", over="ignore", divide="ignore", invalid="ignore"):
        rho = np.exp(1.0 - 1.0 / rm)
        rho1 = rho / rm**2
        rho2 = rho * (1.0 / rm**4 - 2.0 / rm**3)
        v, g1, g2 = _exp_profile(rho, rho1, rho2)
    val[mid] = v
    d1[mid] = g1
    d2[mid] = g2
    return val, d1, d2


def bump_derivatives(r):
    """Return (value, d/dr, d^2/dr^2) of :func:`bump`."""
    r = np.asarray(r, dtype=float)
    val = np.zeros_like(r)
    d1 = np.zeros_like(r)
    d2 = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    rr = r[inside]
    with np.errstate(under="ignore", over="ignore", divide="ignore", invalid="ignore"):
        v, g1, g2 = _exp_profile(rr, np.ones_like(rr), np.zeros_like(rr))
    val[inside] = v
    d1[inside] = g1
    d2[inside] = g2
    return val, d1, d2


def _exp_profile(rho, rho1, rho2):
    # exp(1 - 1/h) with h = 1 - rho^2, differentiated through rho(r).
    h = 1.0 - rho**2
    h1 = -2.0 * rho * rho1
    h2 = -2.0 * (rho1**2 + rho * rho2)
    safe = h > 1e-3
    hs = np.where(safe, h, 1.0)
    v = np.where(safe, np.exp(1.0 - 1.0 / hs), 0.0)
    g1 = h1 / hs**2
    g2 = h2 / hs**2 - 2.0 * h1**2 / hs**3
    d1 = np.where(safe, g1 * v, 0.0)
    d2 = np.where(safe, (g2 + g1**2) * v, 0.0)
    v = np.nan_to_num(v)
    return v, np.nan_to_num(d1), np.nan_to_num(d2)
