"""Observability constant against M and s for a config, as a text table.

Usage: python scripts/run_observability_sweep.py [config.toml]
"""

import sys

from waveobs.config import load_config
from waveobs.control import default_time_steps, observe_cells


def main(path=None):
    cfg = load_config(path)
    cells = observe_cells(cfg.system.build(), cfg.built_windows(), cfg.s_list, cfg.M_list, cfg.T, lambda M: default_time_steps(M, cfg.T))
    print(f"{'window':>8} {'M':>4} " + " ".join(f"{'C(s=' + format(s, 'g') + ')':>12}" for s in cfg.s_list))
    for w in cfg.windows:
        for M in cfg.M_list:
            print(f"{w.id:>8} {M:>4} " + " ".join(f"{C:12.5g}" for _, C in cells[(w.id, M)]))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
