"""Smooth time windows and H^s((0, T)) norms of windowed boundary signals.

A windowed signal is compactly supported in (0, T), so its H^s norm is
taken as the full-line Fourier norm of the zero extension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from waveobs import _smooth
from waveobs.errors import InvalidWindowError

PAD_FACTOR = 4


@dataclass(frozen=True)
class TimeWindow:
    """Smooth cutoff Theta(t) supported in [t0, t1], 0 < t0 < t1 < T.

    ``plateau_fraction`` is the fraction of the half-width on which the
    window equals 1; with 0 the window is the classic bump
    ``exp(1 - 1/(1 - r^2))``.  ``endpoints`` selects which boundary
    points (x = 0, x = 1) are observed; both False gives Theta = 0.
    """

    T: float
    t0: float
    t1: float
    plateau_fraction: float = 0.0
    endpoints: tuple[bool, bool] = (True, True)

    @property
    def center(self) -> float:
        return 0.5 * (self.t0 + self.t1)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.t1 - self.t0)

    @property
    def mask(self) -> np.ndarray:
        return np.array(self.endpoints, dtype=float)

    @property
    def is_zero(self) -> bool:
        return not any(self.endpoints)

    def grid(self, Nt: int) -> np.ndarray:
        return np.linspace(0.0, self.T, Nt + 1)

    def profile(self, t, order: int = 0) -> np.ndarray:
        """Theta or its first/second time derivative, ignoring the endpoint mask."""
        t = np.asarray(t, dtype=float)
        c, h, p = self.center, self.half_width, self.plateau_fraction
        if p == 0.0:
            u = (t - c) / h
            vals = _smooth.bump_derivatives(u)
            return vals[order] / h**order
        d = np.abs(t - c)
        width = (1.0 - p) * h
        r = (d - p * h) / width
        vals = _smooth.ramp_down_derivatives(r)
        sign = np.sign(t - c)
        if order == 0:
            return vals[0]
        if order == 1:
            return vals[1] * sign / width
        return vals[2] / width**2

    def __call__(self, t) -> np.ndarray:
        return self.profile(t)

    def endpoint_profile(self, t, order: int = 0) -> np.ndarray:
        """Per-endpoint values, shape (2, len(t))."""
        return self.mask[:, None] * self.profile(t, order)[None, :]

    def contains(self, other: TimeWindow) -> bool:
        """True if this window is positive on the support of ``other``."""
        if other.is_zero:
            return True
        if self.T != other.T:
            return False
        ends_ok = all(a or not b for a, b in zip(self.endpoints, other.endpoints))
        return ends_ok and self.t0 < other.t0 and other.t1 < self.t1


def make_window(
    T: float,
    t0: float,
    t1: float,
    plateau_fraction: float = 0.0,
    endpoints: tuple[bool, bool] = (True, True),
) -> TimeWindow:
    if not (0.0 < t0 < t1 < T):
        raise InvalidWindowError(f"window support [{t0}, {t1}] must lie strictly inside (0, {T})")
    if not (0.0 <= plateau_fraction < 1.0):
        raise InvalidWindowError("plateau_fraction must be in [0, 1)")
    return TimeWindow(float(T), float(t0), float(t1), float(plateau_fraction), tuple(bool(e) for e in endpoints))


def zero_window(T: float) -> TimeWindow:
    return TimeWindow(float(T), 0.25 * T, 0.75 * T, 0.0, (False, False))


def frequency_grid(n_samples: int, dt: float, pad: int = PAD_FACTOR) -> tuple[np.ndarray, float]:
    """Angular frequencies of the padded transform and their spacing."""
    L = pad * n_samples
    tau = 2.0 * np.pi * np.fft.fftfreq(L, d=dt)
    return tau, 2.0 * np.pi / (L * dt)


def spectral_weights(n_samples: int, dt: float, s: float, pad: int = PAD_FACTOR) -> np.ndarray:
    """Square roots of ``(1 + tau^2)^s dtau / (2 pi)`` times ``dt``.

    Multiplying the padded DFT of samples by these gives a vector whose
    Euclidean norm is the H^s norm of the zero-extended signal.
    """
    tau, dtau = frequency_grid(n_samples, dt, pad)
    return dt * np.sqrt((1.0 + tau**2) ** s * dtau / (2.0 * np.pi))


def hs_norm_samples(g, s: float, dt: float, pad: int = PAD_FACTOR) -> float:
    """H^s norm of an already-windowed sampled signal (time on the last axis)."""
    if not np.isfinite(s):
        raise ValueError("Sobolev index must be finite")
    g = np.asarray(g)
    n = g.shape[-1]
    G = np.fft.fft(g, n=pad * n, axis=-1)
    w = spectral_weights(n, dt, s, pad)
    return float(np.sqrt(np.sum(np.abs(G * w) ** 2)))


def hs_time_norm(signal, s: float, window: TimeWindow, pad: int = PAD_FACTOR) -> float:
    """H^s((0, T)) norm of Theta * signal, summed over endpoints and components.

    ``signal`` is a :class:`~waveobs.evolution.TraceSignal`, an array of
    shape (2, N, Nt+1), or a single time series of shape (Nt+1,).
    """
    if not np.isfinite(s):
        raise ValueError("Sobolev index must be finite")
    values = getattr(signal, "values", signal)
    values = np.asarray(values)
    n = values.shape[-1]
    if n < 2:
        raise ValueError("need at least two time samples")
    t = window.grid(n - 1)
    dt = window.T / (n - 1)
    if values.ndim == 1:
        theta = window.profile(t) * float(not window.is_zero)
        g = theta * values
    else:
        theta = window.endpoint_profile(t)
        g = theta[:, None, :] * values
    return hs_norm_samples(g, s, dt, pad)
