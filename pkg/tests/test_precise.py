import mpmath as mp
import pytest

from waveobs.control import assemble_observation_map, operators_for
from waveobs.operators import SystemCoefficients
from waveobs.precise import free_wave_observability_constant, free_wave_sigma_min, window_value_mp
from waveobs.trace_norms import make_window, zero_window

T = 0.5
ONE_END = make_window(T, 0.025, 0.475, 0.8, (True, False))


@pytest.mark.parametrize("M", [4, 8])
def test_matches_float64_where_resolved(M):
    P, _ = operators_for(SystemCoefficients.zero(1), M)
    ref = assemble_observation_map(P, ONE_END, 0.0, T, 256).sigma_min
    got = float(free_wave_sigma_min(M, ONE_END, T, 256))
    assert got == pytest.approx(ref, rel=1e-5)


def test_matches_float64_both_ends():
    win = make_window(2.5, 0.125, 2.375, 0.8)
    P, _ = operators_for(SystemCoefficients.zero(1), 6)
    ref = assemble_observation_map(P, win, 0.0, 2.5, 256).sigma_min
    assert float(free_wave_sigma_min(6, win, 2.5, 256)) == pytest.approx(ref, rel=1e-10)


def test_window_value_matches_float():
    for t in (0.03, 0.1, 0.25, 0.46):
        assert float(window_value_mp(ONE_END, mp.mpf(t))) == pytest.approx(float(ONE_END(t)), rel=1e-12, abs=1e-300)


def test_zero_window_gives_inf():
    assert free_wave_observability_constant(4, zero_window(T), T, 64) == float("inf")


def test_short_window_constant_blows_up():
    c8 = free_wave_observability_constant(8, ONE_END, T, 256)
    c16 = free_wave_observability_constant(16, ONE_END, T, 256)
    assert c16 / c8 > 1e6
