"""Experiment configuration: TOML file -> frozen dataclasses."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from waveobs.errors import InvalidConfiguration, InvalidWindowError
from waveobs.operators import SystemCoefficients
from waveobs.trace_norms import TimeWindow, make_window, zero_window

FAMILIES = ("zero", "constant-q", "constant-X", "rotation-coupling", "nilpotent", "matrix")


@dataclass(frozen=True)
class SystemSpec:
    N: int = 1
    family: str = "zero"
    strength: float = 1.0
    q: tuple | None = None
    X: tuple | None = None

    def build(self) -> SystemCoefficients:
        f = self.family
        if f == "zero":
            return SystemCoefficients.zero(self.N)
        if f == "constant-q":
            if self.q is not None:
                return SystemCoefficients.from_constant(q=np.array(self.q, dtype=complex), name="constant-q")
            return SystemCoefficients.constant_potential(self.strength, self.N)
        if f == "constant-X":
            if self.X is not None:
                return SystemCoefficients.from_constant(X=np.array(self.X, dtype=complex), name="constant-X")
            return SystemCoefficients.constant_drift(self.strength, self.N)
        if f == "rotation-coupling":
            return SystemCoefficients.rotation_coupling(self.strength, self.N)
        if f == "nilpotent":
            return SystemCoefficients.nilpotent_coupling(self.strength)
        if f == "matrix":
            q = None if self.q is None else np.array(self.q, dtype=complex)
            X = None if self.X is None else np.array(self.X, dtype=complex)
            return SystemCoefficients.from_constant(q=q, X=X, name="matrix")
        raise InvalidConfiguration(f"unknown coefficient family {f!r}")


@dataclass(frozen=True)
class WindowSpec:
    id: str
    t0: float
    t1: float
    plateau: float = 0.0
    endpoints: tuple[bool, bool] = (True, True)

    def build(self, T: float) -> TimeWindow:
        if not any(self.endpoints):
            return zero_window(T)
        return make_window(T, self.t0, self.t1, self.plateau, self.endpoints)


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSpec = field(default_factory=SystemSpec)
    M_list: tuple[int, ...] = (16, 32, 64)
    T: float = 2.5
    Nt: int | None = None
    windows: tuple[WindowSpec, ...] = (WindowSpec("theta1", 0.5, 2.0, 0.6), WindowSpec("theta2", 0.25, 2.25, 0.6))
    s_list: tuple[float, ...] = (-1.0, 0.0, 1.0)
    ellipticity_s: tuple[float, ...] = (0.0,)
    r: int = 1
    mu: float | None = None
    seed: int = 0
    tol: float = 0.10
    states: int = 20
    state_modes: int = 20
    target_modes: int = 8
    output: str = "results"

    def window(self, wid: str) -> TimeWindow:
        for w in self.windows:
            if w.id == wid:
                return w.build(self.T)
        raise InvalidConfiguration(f"no window with id {wid!r}")

    def built_windows(self) -> list[tuple[str, TimeWindow]]:
        return [(w.id, w.build(self.T)) for w in self.windows]

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def with_seed(self, seed: int | None) -> ExperimentConfig:
        return self if seed is None else replace(self, seed=int(seed))


def _matrix(v):
    if v is None:
        return None
    arr = np.array(v, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidConfiguration("matrix literals must be square nested lists")
    return tuple(tuple(float(x) for x in row) for row in arr)


def from_dict(raw: dict) -> ExperimentConfig:
    known = {"system", "grid", "windows", "experiment"}
    extra = set(raw) - known
    if extra:
        raise InvalidConfiguration(f"unknown top-level keys: {sorted(extra)}")
    sysd = dict(raw.get("system", {}))
    fam = sysd.get("family", "zero")
    if fam not in FAMILIES:
        raise InvalidConfiguration(f"family must be one of {FAMILIES}, got {fam!r}")
    q, X = _matrix(sysd.get("q")), _matrix(sysd.get("X"))
    N = int(sysd.get("N", len(q) if q else (len(X) if X else (2 if fam in ("rotation-coupling", "nilpotent") else 1))))
    for mat in (q, X):
        if mat is not None and len(mat) != N:
            raise InvalidConfiguration("matrix literal size must equal N")
    system = SystemSpec(N, fam, float(sysd.get("strength", 1.0)), q, X)

    grid = raw.get("grid", {})
    M_list = tuple(int(m) for m in grid.get("M_list", (16, 32, 64)))
    if not M_list or any(b <= a for a, b in zip(M_list, M_list[1:])) or M_list[0] < 1:
        raise InvalidConfiguration("M_list must be a strictly increasing list of positive integers")
    T = float(grid.get("T", 2.5))
    if not T > 0:
        raise InvalidConfiguration("T must be positive")
    Nt = grid.get("Nt")
    Nt = None if Nt in (None, 0) else int(Nt)
    if Nt is not None and Nt < 2:
        raise InvalidConfiguration("Nt must be at least 2")

    windows = []
    for w in raw.get("windows", []):
        try:
            ends = tuple(bool(e) for e in w.get("endpoints", (True, True)))
            spec = WindowSpec(str(w["id"]), float(w.get("t0", 0.2 * T)), float(w.get("t1", 0.8 * T)), float(w.get("plateau", 0.0)), ends)
        except KeyError as exc:
            raise InvalidConfiguration(f"window entry missing {exc}") from None
        if len(ends) != 2:
            raise InvalidConfiguration("endpoints must have two entries")
        try:
            spec.build(T)
        except InvalidWindowError as exc:
            raise InvalidConfiguration(f"window {spec.id!r}: {exc}") from None
        windows.append(spec)
    if not windows:
        windows = [WindowSpec("theta1", 0.2 * T, 0.8 * T, 0.6), WindowSpec("theta2", 0.1 * T, 0.9 * T, 0.6)]
    if len({w.id for w in windows}) != len(windows):
        raise InvalidConfiguration("window ids must be unique")

    ex = raw.get("experiment", {})
    mu = ex.get("mu")
    cfg = ExperimentConfig(
        system=system,
        M_list=M_list,
        T=T,
        Nt=Nt,
        windows=tuple(windows),
        s_list=tuple(float(s) for s in ex.get("s_list", (-1.0, 0.0, 1.0))),
        ellipticity_s=tuple(float(s) for s in ex.get("ellipticity_s", (0.0,))),
        r=int(ex.get("r", 1)),
        mu=None if mu is None else float(mu),
        seed=int(ex.get("seed", 0)),
        tol=float(ex.get("tol", 0.10)),
        states=int(ex.get("states", 20)),
        state_modes=int(ex.get("state_modes", 20)),
        target_modes=int(ex.get("target_modes", 8)),
        output=str(ex.get("output", "results")),
    )
    try:
        cfg.system.build()
    except (ValueError, TypeError) as exc:
        raise InvalidConfiguration(f"bad coefficient spec: {exc}") from None
    return cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise InvalidConfiguration(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfiguration(f"cannot parse config: {exc}") from None
    try:
        return from_dict(raw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidConfiguration):
            raise
        raise InvalidConfiguration(str(exc)) from None
