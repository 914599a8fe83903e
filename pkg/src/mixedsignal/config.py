"""Flat key = value run configuration.

Keys are the model parameters by their lower-snake-cased names; unknown
keys are rejected so every input traces to a documented parameter.  Point
parameters default to the reference setup; interval parameters (p, c,
green_ratio, q) have no default and must be supplied by commands that need
them.  Values outside the reference intervals draw warnings, not errors.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .capacity import VehicleParams
from .delay import HdvStartupParams
from .errors import ConfigError
from .markov import MarkovSpec

__all__ = [
    "RunConfig",
    "SweepVar",
    "parse_sweep",
    "parse_config_file",
    "build_run_config",
    "format_value",
]

_SWEEPABLE = ("p", "q", "green_ratio", "c")

# Reference intervals; values outside draw a warning but still run.
_RANGES = {
    "p": (0.0, 1.0),
    "c": (60.0, 120.0),
    "green_ratio": (0.25, 0.75),
    "q": (0.15, 0.35),
}

_ECHO_ORDER = (
    "omega_e",
    "omega_v",
    "n",
    "v_free",
    "t_r",
    "t_a",
    "tau_safe",
    "tau_hdv",
    "vehicle_length",
    "p",
    "c",
    "green_ratio",
    "q",
    "x_c",
    "l_c",
    "critical_flow_ratios",
    "phases",
    "ls_mode",
    "objective",
    "seed",
    "out",
    "svg",
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters (defaults merged)."""

    omega_e: float = 1.2
    omega_v: float = 0.5
    n: int = 5
    v_free: float = 15.0
    t_r: float = 2.0
    t_a: float = 3.0
    tau_safe: float = 0.3
    tau_hdv: float = 1.5
    vehicle_length: float = 5.0
    p: float | None = None
    c: float | None = None  # cycle length, sec
    green_ratio: float | None = None
    q: float | None = None  # arrival rate, veh/sec
    x_c: float = 0.95
    l_c: float = 4.0
    critical_flow_ratios: tuple[float, ...] | None = None
    phases: int = 2
    ls_mode: str = "derived"
    objective: str = "average"
    seed: int = 0
    out: str | None = None
    svg: bool = False

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if getattr(self, k) is None]
        if missing:
            raise ConfigError(
                "missing required parameter(s): " + ", ".join(missing)
            )

    def vehicle_params(self) -> VehicleParams:
        return VehicleParams(
            omega_e=self.omega_e,
            omega_v=self.omega_v,
            tau_safe=self.tau_safe,
            tau_hdv=self.tau_hdv,
            vehicle_length=self.vehicle_length,
            v_free=self.v_free,
        )

    def markov_spec(self, p: float | None = None) -> MarkovSpec:
        if p is None:
            self.require("p")
            p = self.p
        return MarkovSpec(n=self.n, p=p)

    def startup(self) -> HdvStartupParams:
        return HdvStartupParams(reaction_time=self.t_r, accel_time=self.t_a)

    def range_warnings(self) -> list[str]:
        notes = []
        for key, (lo, hi) in _RANGES.items():
            value = getattr(self, key)
            if value is not None and not lo <= value <= hi:
                notes.append(
                    f"{key} = {format_value(value)} lies outside the "
                    f"reference interval [{format_value(lo)}, {format_value(hi)}]"
                )
        return notes

    def echo_lines(self) -> list[str]:
        """Resolved configuration as stable comment lines for output headers."""
        lines = []
        for key in _ECHO_ORDER:
            lines.append(f"# {key} = {format_value(getattr(self, key))}")
        lines.extend(f"# warning: {note}" for note in self.range_warnings())
        return lines


@dataclass(frozen=True)
class SweepVar:
    """One sweep dimension: parameter name plus an inclusive lo:hi:step grid."""

    name: str
    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if self.name not in _SWEEPABLE:
            raise ConfigError(
                f"cannot sweep {self.name!r}; choose one of {', '.join(_SWEEPABLE)}"
            )
        if self.step <= 0.0:
            raise ConfigError(f"sweep step must be positive, got {self.step:g}")
        if self.lo >= self.hi:
            raise ConfigError(
                f"sweep range must have lo < hi, got {self.lo:g} >= {self.hi:g}"
            )

    def values(self) -> list[float]:
        count = int(round((self.hi - self.lo) / self.step))
        points = [self.lo + k * self.step for k in range(count + 1)]
        return [v for v in points if v <= self.hi + 1e-9]


def parse_sweep(text: str) -> SweepVar:
    """Parse ``name=lo:hi:step`` into a SweepVar."""
    if "=" not in text:
        raise ConfigError(f"sweep spec {text!r} must look like name=lo:hi:step")
    name, _, grid = text.partition("=")
    parts = grid.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep spec {text!r} must look like name=lo:hi:step")
    try:
        lo, hi, step = (float(part) for part in parts)
    except ValueError as exc:
        raise ConfigError(f"sweep spec {text!r}: {exc}") from None
    return SweepVar(name=name.strip(), lo=lo, hi=hi, step=step)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if key in ("n", "phases", "seed"):
            return int(raw)
        if key == "critical_flow_ratios":
            return tuple(float(part) for part in raw.split(",") if part.strip())
        if key in ("ls_mode", "objective", "out"):
            return raw
        if key == "svg":
            if raw not in ("0", "1", "true", "false"):
                raise ValueError("expected 0/1/true/false")
            return raw in ("1", "true")
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {key} = {raw!r} ({exc})") from None


def parse_config_file(path: str | Path) -> dict:
    """Read a flat key = value file, rejecting unknown keys with line numbers."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    entries: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown parameter {key!r}")
        entries[key] = _convert(key, raw, f"{path}:{lineno}")
    return entries


def build_run_config(
    config_path: str | Path | None,
    overrides: list[str] | None = None,
    **flag_overrides,
) -> RunConfig:
    """Merge defaults, an optional config file, --set pairs, and flag values."""
    entries: dict = {}
    if config_path is not None:
        entries.update(parse_config_file(config_path))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set {item!r} must look like key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"--set: unknown parameter {key!r}")
        entries[key] = _convert(key, raw, "--set")
    config = replace(RunConfig(), **entries)
    cleaned = {k: v for k, v in flag_overrides.items() if v is not None}
    if cleaned:
        config = replace(config, **cleaned)
    ls_mode = config.ls_mode
    if ls_mode not in ("derived", "paper"):
        raise ConfigError(f"ls_mode must be 'derived' or 'paper', got {ls_mode!r}")
    if config.objective not in ("total", "average"):
        raise ConfigError(
            f"objective must be 'total' or 'average', got {config.objective!r}"
        )
    if config.n < 1:
        raise ConfigError(f"n must be at least 1, got {config.n}")
    if config.phases < 1:
        raise ConfigError(f"phases must be at least 1, got {config.phases}")
    return config


def format_value(value) -> str:
    """Stable text for CSV cells and header echoes (9 significant digits)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.9g}"
    if isinstance(value, tuple):
        return ",".join(f"{v:.9g}" for v in value)
    return str(value)
