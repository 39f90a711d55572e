"""Minimal-norm boundary control for a random target, checked by a forward solve.

Usage: python scripts/run_hum.py [config.toml]
"""

import sys

import numpy as np

from waveobs.config import load_config
from waveobs.control import ControlProblem, default_time_steps, hum_control, operators_for
from waveobs.errors import IllPosedControlError
from waveobs.spectral import VectorState


def main(path=None):
    cfg = load_config(path)
    rng = np.random.default_rng(cfg.seed)
    N = cfg.system.N
    wid, win = cfg.built_windows()[0]
    for M in cfg.M_list:
        tg = np.zeros((2, N, M), complex)
        k = min(cfg.target_modes, M)
        tg[..., :k] = rng.standard_normal((2, N, k)) + 1j * rng.standard_normal((2, N, k))
        P, Pa = operators_for(cfg.system.build(), M)
        prob = ControlProblem(VectorState(tg, -1.0), win, cfg.T)
        try:
            hum_control(prob, P, Pa, default_time_steps(M, cfg.T))
        except IllPosedControlError as exc:
            print(f"M={M:3d} window={wid}: {exc}")
            continue
        print(f"M={M:3d} window={wid}: |f|={prob.control_norm:.4e} rel_error={prob.error:.2e} sigma_min={prob.sigma_min:.3e}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
