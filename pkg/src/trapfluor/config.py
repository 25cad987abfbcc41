"""Run configuration: a line-oriented ``key = value`` format and named parameter presets.

Grammar::

    # comment (also allowed after a value)
    key = value

Keys (angles in degrees)::

    preset            name from PRESETS, applied before every other key
    delta omega gamma eta beta eta_max   floats
    theta psi         floats, degrees
    nmax              integer
    drive.kind        traveling | standing
    drive.phi         float, degrees (standing wave only)
    grid.min grid.max floats;  grid.points  integer
    mode              perturbative | oracle | both
    output            path
    emit_lines emit_plot_script   true | false
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .errors import ConfigError, ParameterError
from .model import PhysParams, StandingWave, TravelingWave

MODES = ("perturbative", "oracle", "both")
DRIVES = ("traveling", "standing")


@dataclass(frozen=True)
class RunConfig:
    delta: float = -1.0
    omega: float = 1.0
    gamma: float = 0.1
    eta: float = 0.1
    theta: float = 0.0
    psi: float = 40.0
    beta: float = 0.4
    nmax: int = 20
    eta_max: float = 0.3
    drive_kind: str = "traveling"
    drive_phi: float = 0.0
    grid_min: float = -4.0
    grid_max: float = 4.0
    grid_points: int = 2001
    mode: str = "perturbative"
    preset: Optional[str] = None
    output: str = "spectrum.dat"
    emit_lines: bool = False
    emit_plot_script: bool = False

    @property
    def grid(self) -> tuple[float, float, int]:
        return self.grid_min, self.grid_max, self.grid_points

    def params(self) -> PhysParams:
        if self.drive_kind == "standing":
            drive = StandingWave(math.radians(self.drive_phi))
        else:
            drive = TravelingWave()
        return PhysParams(
            delta=self.delta,
            omega=self.omega,
            gamma=self.gamma,
            eta=self.eta,
            theta=math.radians(self.theta),
            psi=math.radians(self.psi),
            drive=drive,
            beta=self.beta,
            nmax=self.nmax,
            eta_max=self.eta_max,
        )


# every preset has delta = -1, Omega = 1, theta = 0
PRESETS: dict[str, dict] = {
    "fig2a": dict(gamma=0.33, eta=0.1, psi=40.0),
    "fig2b": dict(gamma=0.33, eta=0.1, psi=200.0),
    "fig2c": dict(gamma=0.1, eta=0.1, psi=40.0),
    "fig2d": dict(gamma=0.1, eta=0.1, psi=200.0),
    "fig3a": dict(gamma=0.1, eta=0.1, psi=40.0, drive_kind="standing", drive_phi=45.0),
    "fig3b": dict(gamma=0.1, eta=0.1, psi=200.0, drive_kind="standing", drive_phi=45.0),
    "fig4a": dict(gamma=0.1, eta=0.05, psi=200.0, drive_kind="standing", drive_phi=45.0),
    "fig4b": dict(gamma=0.1, eta=0.05, psi=200.0, drive_kind="standing", drive_phi=67.5),
    "fig4c": dict(gamma=0.1, eta=0.05, psi=200.0, drive_kind="standing", drive_phi=90.0),
}

# reference mean phonon numbers for each preset
PRESET_NBAR = {
    "fig2a": 0.15,
    "fig2b": 0.15,
    "fig2c": 0.14,
    "fig2d": 0.14,
    "fig3a": 0.04,
    "fig3b": 0.04,
    "fig4a": 0.04,
    "fig4b": 0.002,
    "fig4c": 0.0006,
}

# config key -> RunConfig field
KEYS = {
    "preset": "preset",
    "delta": "delta",
    "omega": "omega",
    "gamma": "gamma",
    "eta": "eta",
    "theta": "theta",
    "psi": "psi",
    "beta": "beta",
    "nmax": "nmax",
    "eta_max": "eta_max",
    "drive.kind": "drive_kind",
    "drive.phi": "drive_phi",
    "grid.min": "grid_min",
    "grid.max": "grid_max",
    "grid.points": "grid_points",
    "mode": "mode",
    "output": "output",
    "emit_lines": "emit_lines",
    "emit_plot_script": "emit_plot_script",
}
FIELD_KEYS = {v: k for k, v in KEYS.items()}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def preset_config(name: str, base: Optional[RunConfig] = None) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return replace(base or RunConfig(), preset=name, **PRESETS[name])


def _convert(field: str, raw: str):
    kind = _TYPES[field]
    if kind == "float":
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value
    if kind == "int":
        return int(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError("expected true or false")
    if field == "mode" and raw not in MODES:
        raise ValueError(f"expected one of {', '.join(MODES)}")
    if field == "drive_kind" and raw not in DRIVES:
        raise ValueError(f"expected one of {', '.join(DRIVES)}")
    if not raw:
        raise ValueError("empty value")
    return raw


def validate(cfg: RunConfig, lines: Optional[dict[str, int]] = None) -> RunConfig:
    lines = lines or {}

    def fail(msg, field):
        raise ConfigError(msg, lines.get(field))

    if not cfg.grid_min < cfg.grid_max:
        fail(f"grid.min={cfg.grid_min} must be below grid.max={cfg.grid_max}", "grid_max")
    if cfg.grid_points < 2:
        fail(f"grid.points={cfg.grid_points} must be at least 2", "grid_points")
    try:
        cfg.params()
    except ParameterError as exc:
        fail(str(exc), exc.name)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; errors name the offending line."""
    values: dict[str, object] = {}
    where: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        field = KEYS[key]
        if field in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[field] = _convert(field, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} for {key}: {exc}", lineno) from None
        where[field] = lineno
    cfg = RunConfig()
    if "preset" in values:
        try:
            cfg = preset_config(str(values["preset"]))
        except ConfigError as exc:
            raise ConfigError(str(exc), where["preset"]) from None
    cfg = replace(cfg, **values)
    return validate(cfg, where)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def serialize(cfg: RunConfig) -> str:
    """Canonical text form: every key, fixed order, shortest round-trip floats."""
    out = []
    for field, value in asdict(cfg).items():
        if value is None:
            continue
        out.append(f"{FIELD_KEYS[field]} = {_format(value)}")
    return "\n".join(out) + "\n"


def normalize(text: str) -> str:
    return serialize(parse_config(text))
