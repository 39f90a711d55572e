"""Extended-precision observability constants for the free scalar wave.

In non-observable configurations the smallest singular value of the
observation map drops below double-precision round-off already at modest
M, so 1/sigma_min cannot be resolved from the float64 matrix.  For
``u_tt = u_xx`` the windowed traces are explicit trigonometric sums and,
at s = 0, the Gram matrix of the map only needs the sampled window
moments ``sum_i dt Theta(t_i)^2 exp(i m pi t_i)``.  This module rebuilds
that Gram matrix in mpmath and returns the same sigma_min as the float64
pipeline would with exact arithmetic.
"""

from __future__ import annotations

import mpmath as mp

from waveobs.trace_norms import TimeWindow


def _bump_mp(r):
    if abs(r) >= 1:
        return mp.mpf(0)
    return mp.exp(1 - 1 / (1 - r * r))


def _ramp_down_mp(r):
    if r <= 0:
        return mp.mpf(1)
    if r >= 1:
        return mp.mpf(0)
    rho = mp.exp(1 - 1 / r)
    h = 1 - rho * rho
    return mp.exp(1 - 1 / h) if h > 0 else mp.mpf(0)


def window_value_mp(window: TimeWindow, t) -> mp.mpf:
    """Window profile (endpoint mask ignored) evaluated in mpmath."""
    c = (mp.mpf(window.t0) + mp.mpf(window.t1)) / 2
    h = (mp.mpf(window.t1) - mp.mpf(window.t0)) / 2
    p = mp.mpf(window.plateau_fraction)
    if window.plateau_fraction == 0.0:
        return _bump_mp((t - c) / h)
    return _ramp_down_mp((abs(t - c) - p * h) / ((1 - p) * h))


def _smallest_eigenvalue(G):
    return min(mp.eigsy(G, eigvals_only=True))


def free_wave_sigma_min(M: int, window: TimeWindow, T: float, Nt: int, dps: int | None = None) -> mp.mpf:
    """sigma_min of the s = 0 observation map of the free wave, in mpmath.

    Matches :func:`waveobs.control.assemble_observation_map` for zero
    coefficients: data normalized in K^1 x K^0, sampled traces with
    weight dt, both endpoint masks honoured.
    """
    if dps is None:
        dps = 40 + 5 * M
    with mp.workdps(dps):
        dt = mp.mpf(T) / Nt
        times = [i * dt for i in range(Nt + 1)]
        w2 = [dt * window_value_mp(window, t) ** 2 for t in times]
        # moments C_m, S_m of the squared window against cos/sin(m pi t)
        Cm, Sm = [], []
        for m in range(2 * M + 1):
            cs = [mp.cospi(m * t) for t in times]
            sn = [mp.sinpi(m * t) for t in times]
            Cm.append(mp.fsum(a * b for a, b in zip(w2, cs)))
            Sm.append(mp.fsum(a * b for a, b in zip(w2, sn)))

        def C(m):
            return Cm[abs(m)]

        def S(m):
            return Sm[m] if m >= 0 else -Sm[-m]

        # column scalings: position data cos(k pi t)/sqrt(1+lambda), velocity sin(k pi t)/(k pi)
        scale = []
        for k in range(1, M + 1):
            lam = (k * mp.pi) ** 2
            scale.append(mp.sqrt(2) * k * mp.pi / mp.sqrt(1 + lam))
        for k in range(1, M + 1):
            scale.append(mp.sqrt(2))
        # inner products of cos/sin(k pi t) against the squared window
        H = mp.matrix(2 * M, 2 * M)
        for a in range(2 * M):
            ja, ca = a % M + 1, a < M
            for b in range(a, 2 * M):
                jb, cb = b % M + 1, b < M
                if ca and cb:
                    v = (C(ja - jb) + C(ja + jb)) / 2
                elif not ca and not cb:
                    v = (C(ja - jb) - C(ja + jb)) / 2
                elif ca:
                    v = (S(jb + ja) + S(jb - ja)) / 2
                else:
                    v = (S(ja + jb) + S(ja - jb)) / 2
                H[a, b] = H[b, a] = v * scale[a] * scale[b]
        # endpoint x = 1 carries (-1)^(k+1) per mode
        mask = window.mask
        G = mp.matrix(2 * M, 2 * M)
        for a in range(2 * M):
            sa = (-1) ** (a % M)
            for b in range(2 * M):
                sb = (-1) ** (b % M)
                G[a, b] = H[a, b] * (mask[0] + mask[1] * sa * sb)
        lam = _smallest_eigenvalue(G)
        return mp.sqrt(max(lam, mp.mpf(0)))


def free_wave_observability_constant(M: int, window: TimeWindow, T: float, Nt: int, dps: int | None = None) -> float:
    """``1/sigma_min`` from :func:`free_wave_sigma_min`, as a float (may be inf)."""
    if window.is_zero:
        return float("inf")
    smin = free_wave_sigma_min(M, window, T, Nt, dps)
    if smin == 0:
        return float("inf")
    return float(1 / smin)
