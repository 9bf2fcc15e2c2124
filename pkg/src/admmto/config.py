"""Solver configuration and the flat ``key=value`` config file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class SolverConfig:
    # problem
    n: int = 32
    alpha: float = 5e-5
    V_max: float = 0.4
    simp_delta: float = 1e-3
    simp_p: float = 3.0
    source: float = 1.0
    # outer loop and funnel
    rho0: float = 1e-2
    gamma: float = 2.0
    beta: float = 0.9
    zeta: float = 0.5
    c: float = 2.0
    delta_tol: float = 1e-2
    max_outer: int = 200
    # continuous subproblem
    tol_inner: float = 1e-6
    max_inner: int = 500
    t_init: float = 1.0
    tol_lin: float = 1e-10
    # discrete subproblem heuristic
    q: float = 0.7
    R_max: int = 64
    sweeps: float = 20.0  # region proposals per element
    restarts: int = 2
    seed: int = 0
    # output
    output_dir: str = "out"
    snapshot_stride: int = 10

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def need(ok, msg):
            if not ok:
                raise ConfigError(msg)

        need(self.n >= 1, "n must be a positive integer")
        need(self.alpha >= 0, "alpha must be nonnegative")
        need(0 < self.V_max <= 1, "V_max must lie in (0,1]")
        need(0 < self.simp_delta < 1, "simp_delta must lie in (0,1)")
        need(self.simp_p >= 1, "simp_p must be >= 1")
        need(self.rho0 > 0, "rho0 must be positive")
        need(self.gamma > 1, "gamma must be > 1")
        need(0 < self.beta < 1, "beta must lie in (0,1)")
        need(0 < self.zeta < 1, "zeta must lie in (0,1)")
        need(self.c > 1, "c must be > 1")
        need(self.delta_tol > 0, "delta_tol must be positive")
        need(self.max_outer >= 0, "max_outer must be >= 0")
        need(self.tol_inner > 0, "tol_inner must be positive")
        need(self.max_inner >= 1, "max_inner must be >= 1")
        need(self.t_init > 0, "t_init must be positive")
        need(self.tol_lin > 0, "tol_lin must be positive")
        need(0 <= self.q <= 1, "q must lie in [0,1]")
        need(self.R_max >= 1, "R_max must be >= 1")
        need(self.sweeps >= 0, "sweeps must be >= 0")
        need(self.restarts >= 1, "restarts must be >= 1")
        need(self.snapshot_stride >= 1, "snapshot_stride must be >= 1")

    @property
    def budget(self) -> float:
        return self.V_max * 2 * self.n**2

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))


_TYPES = {f.name: f.type for f in fields(SolverConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    if kind == "int":
        as_float = float(raw)
        if not as_float.is_integer():
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(as_float)
    if kind == "float":
        return float(raw)
    return raw


def parse_config(text: str, **overrides) -> SolverConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**values)


def load_config(path, **overrides) -> SolverConfig:
    return parse_config(Path(path).read_text(), **overrides)
