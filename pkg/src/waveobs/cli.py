"""Command-line front end: ``waveobs <subcommand> [--config F] [--out D]``.

Exit codes: 0 pass, 1 check failure, 2 configuration error,
3 hypothesis violation.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from waveobs import checks
from waveobs.config import ExperimentConfig, load_config
from waveobs.control import (
    ControlProblem,
    default_time_steps,
    ellipticity_sweep,
    hum_control,
    observe_cells,
    operators_for,
    random_states,
    regularity_shift_experiment,
    shift_implications,
)
from waveobs.errors import (
    HypothesisViolation,
    IllPosedControlError,
    InvalidConfiguration,
    InvalidWindowError,
    NoCertifiedMuError,
)
from waveobs.operators import SystemCoefficients
from waveobs.spectral import VectorState

log = logging.getLogger("waveobs")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_HYPOTHESIS = 0, 1, 2, 3
ELLIPTICITY_VARIATION = 0.30
CONTROL_TOL = 1e-4


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, comment: str, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _steps(cfg: ExperimentConfig):
    return cfg.Nt if cfg.Nt is not None else (lambda M: default_time_steps(M, cfg.T))


def cmd_observe(cfg: ExperimentConfig, pool) -> tuple[int, str, list[str], list[list]]:
    h = cfg.config_hash()
    cells = observe_cells(cfg.system.build(), cfg.built_windows(), cfg.s_list, cfg.M_list, cfg.T, _steps(cfg), pool.map)
    rows = []
    for w in cfg.windows:
        for M in cfg.M_list:
            for s, (smin, C) in zip(cfg.s_list, cells[(w.id, M)]):
                rows.append([s, M, w.id, smin, C, np.isfinite(C), h])
    comment = "data normalized in K^(s+1) x K^s; traces in H^s(0,T) of the zero extension; C_obs = 1/sigma_min (inf = non-observable)"
    return EXIT_OK, comment, ["s", "M", "window_id", "sigma_min", "C_obs", "observable", "config_hash"], rows


def cmd_control(cfg: ExperimentConfig, pool) -> tuple[int, str, list[str], list[list]]:
    h = cfg.config_hash()
    coeffs = cfg.system.build()
    N = cfg.system.N
    cells = [(w.id, w.build(cfg.T), M) for w in cfg.windows for M in cfg.M_list]

    def run(cell):
        wid, win, M = cell
        rng = np.random.default_rng([cfg.seed, M])
        tg = np.zeros((2, N, M), complex)
        k = min(cfg.target_modes, M)
        tg[..., :k] = rng.standard_normal((2, N, k)) + 1j * rng.standard_normal((2, N, k))
        P, Pa = operators_for(coeffs, M)
        Nt = cfg.Nt or default_time_steps(M, cfg.T)
        prob = ControlProblem(VectorState(tg, -1.0), win, cfg.T, 0.0)
        try:
            hum_control(prob, P, Pa, Nt)
        except IllPosedControlError:
            return [M, wid, prob.sigma_min or 0.0, float("nan"), float("nan"), "ill-posed", h]
        status = "ok" if prob.error <= CONTROL_TOL else "inaccurate"
        return [M, wid, prob.sigma_min, prob.control_norm, prob.error, status, h]

    rows = list(pool.map(run, cells))
    code = EXIT_OK if all(r[5] == "ok" for r in rows) else EXIT_FAIL
    comment = "control in H^0(0,T) Fourier basis; target in K^0 x K^-1; rel_error from an independent forward solve"
    return code, comment, ["M", "window_id", "sigma_min", "control_norm", "rel_error", "status", "config_hash"], rows


def cmd_ellipticity(cfg: ExperimentConfig, pool) -> tuple[int, str, list[str], list[list]]:
    h = cfg.config_hash()
    bad = [s for s in cfg.ellipticity_s if not s > -1]
    if bad:
        raise HypothesisViolation(f"ellipticity of d_t needs s > -1; got {bad}")
    coeffs = cfg.system.build()
    rng = np.random.default_rng(cfg.seed)
    cells = [(w.id, w.build(cfg.T), s) for w in cfg.windows for s in cfg.ellipticity_s]
    states = {s: random_states(rng, cfg.system.N, cfg.state_modes, cfg.states, s) for s in cfg.ellipticity_s}

    def run(cell):
        wid, win, s = cell
        if win.is_zero:
            return []
        reps = ellipticity_sweep(coeffs, win, s, cfg.r, cfg.M_list, states[s], Nt=cfg.Nt)
        mx = [r.max_ratio for r in reps]
        var = (max(mx) - min(mx)) / max(mx)
        return [[s, r.M, wid, cfg.r, r.max_ratio, float(np.min(r.ratios)), var, h] for r in reps]

    rows = [row for block in pool.map(run, cells) for row in block]
    code = EXIT_OK if all(r[6] < ELLIPTICITY_VARIATION for r in rows) else EXIT_FAIL
    comment = "ratio = |Theta d_nu u|_{H^s} / (|Theta d_t^{2r} d_nu u|_{H^{s-2r}} + |u0|_{K^{s+1/2}} + |u1|_{K^{s-1/2}})"
    return code, comment, ["s", "M", "window_id", "r", "max_ratio", "min_ratio", "variation", "config_hash"], rows


def cmd_shift_table(cfg: ExperimentConfig, pool) -> tuple[int, str, list[str], list[list]]:
    h = cfg.config_hash()
    wins = cfg.built_windows()
    if not wins:
        raise InvalidConfiguration("shift-table needs at least one window")
    theta2 = wins[1][1] if len(wins) > 1 else None
    rows = regularity_shift_experiment(
        cfg.system.build(), wins[0][1], cfg.s_list, cfg.M_list, cfg.T, theta2, _steps(cfg), cfg.tol, pool.map
    )
    ids = {"theta1": wins[0][0], "theta2": wins[1][0] if theta2 is not None else "theta2"}
    out = [[r.s, r.M, ids[r.window_id], r.C_obs, r.stable, h] for r in rows]
    imp = shift_implications(rows)
    code = EXIT_OK if all(imp.values()) else EXIT_FAIL
    comment = f"stable = successive C_obs ratios within 1 +- {cfg.tol!r} over M_list; increasing={imp['increasing']}; decreasing={imp['decreasing']}"
    return code, comment, ["s", "M", "window_id", "C_obs", "stable_flag", "config_hash"], out


def cmd_verify(cfg: ExperimentConfig, pool) -> tuple[int, str, list[str], list[list]]:
    h = cfg.config_hash()
    rng = np.random.default_rng(cfg.seed)
    system = cfg.system.build()
    M0 = cfg.M_list[0]
    families = [system, SystemCoefficients.rotation_coupling(1.5, 2), SystemCoefficients.random_smooth(2, rng)]
    tasks = [
        lambda: [checks.check_adjoint(families, M0, 20, np.random.default_rng([cfg.seed, 1]))],
        lambda: [checks.check_mu(SystemCoefficients.nilpotent_coupling(), cfg.M_list, cfg.mu)],
        lambda: checks.check_conservation(cfg.system.N, M0, 4.0, 4096, np.random.default_rng([cfg.seed, 2])),
        lambda: [checks.check_duality(system, M0, cfg.T, 1024, 10, np.random.default_rng([cfg.seed, 3]))],
        lambda: checks.check_symbols(np.random.default_rng([cfg.seed, 4])),
    ]

    def run(task):
        try:
            return task()
        except NoCertifiedMuError as exc:
            return [checks.CheckResult("shift_certification", float("nan"), 0.5, False, str(exc))]

    results = [r for block in pool.map(run, tasks) for r in block]
    rows = [[r.name, r.value, r.tolerance, r.passed, r.detail, h] for r in results]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
    return code, "value compared against tolerance; passed = 1", ["check", "value", "tolerance", "passed", "detail", "config_hash"], rows


COMMANDS = {
    "observe": cmd_observe,
    "control": cmd_control,
    "ellipticity": cmd_ellipticity,
    "shift-table": cmd_shift_table,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="waveobs", description="Spectral-Galerkin observability lab for coupled 1D wave systems.")
    p.add_argument("subcommand", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, default=None, help="TOML experiment config (defaults built in)")
    p.add_argument("--out", type=Path, default=None, help="output directory for CSV files")
    p.add_argument("--threads", type=int, default=None, help="worker threads for sweep cells")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("WAVEOBS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidConfiguration(f"WAVEOBS_THREADS must be an integer, got {env!r}") from None
    return 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config).with_seed(args.seed)
        threads = resolve_threads(args.threads)
        out_dir = args.out if args.out is not None else Path(cfg.output)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            code, comment, header, rows = COMMANDS[args.subcommand](cfg, pool)
    except (InvalidConfiguration, InvalidWindowError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    path = out_dir / f"{args.subcommand.replace('-', '_')}.csv"
    write_csv(path, comment, header, rows)
    log.info("wrote %s (%d rows)", path, len(rows))
    status = "pass" if code == EXIT_OK else "FAIL"
    print(f"{args.subcommand}: {status} ({len(rows)} rows -> {path})")
    return code


if __name__ == "__main__":
    sys.exit(main())
