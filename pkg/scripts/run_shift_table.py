"""Regularity-shift table (C_obs over s x M) with stability flags.

Usage: python scripts/run_shift_table.py [config.toml]
"""

import sys

from waveobs.config import load_config
from waveobs.control import regularity_shift_experiment, shift_implications


def main(path=None):
    cfg = load_config(path)
    wins = cfg.built_windows()
    second = wins[1][1] if len(wins) > 1 else None
    rows = regularity_shift_experiment(cfg.system.build(), wins[0][1], cfg.s_list, cfg.M_list, cfg.T, second, tol=cfg.tol)
    for r in rows:
        print(f"s={r.s:5g} M={r.M:4d} {r.window_id:7s} C_obs={r.C_obs:12.5g} stable={int(r.stable)}")
    print(shift_implications(rows))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
