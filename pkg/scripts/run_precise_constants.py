"""Extended-precision observability constants of the free wave.

float64 cannot resolve sigma_min below ~1e-13; this evaluates the s = 0
Gram matrix in mpmath to show how fast C_obs grows for a short window.

Usage: python scripts/run_precise_constants.py [T] [M ...]
"""

import sys

from waveobs.control import default_time_steps
from waveobs.precise import free_wave_observability_constant
from waveobs.trace_norms import make_window


def main(argv):
    T = float(argv[0]) if argv else 0.5
    Ms = [int(m) for m in argv[1:]] or [8, 16, 32]
    win = make_window(T, 0.05 * T, 0.95 * T, 0.8, (True, False))
    for M in Ms:
        C = free_wave_observability_constant(M, win, T, default_time_steps(M, T))
        print(f"T={T:g} M={M:3d} C_obs={C:.4e}")


if __name__ == "__main__":
    main(sys.argv[1:])
