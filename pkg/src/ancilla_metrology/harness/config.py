"""
Run configuration: flat ``key = value`` files and command-line overrides.

Every field can be written as ``auto`` when it has a derived default (the
optimal working point).  Serializing and re-parsing a config is lossless.
"""
from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..errors import ConfigError

MODES = ("qfi", "cfi", "sweep", "figure", "validate")
AXES = ("N", "t1", "t2", "theta", "dt", "beta")
PROBES = ("polarized", "superposed", "ghz_x", "mixture", "thermal")
MEASURES = ("qfi", "cfi", "both")
FORMATS = ("csv", "json")
METHODS = ("auto", "pure", "spectral", "sld", "all")

_PI_RE = re.compile(r"^([-+]?)((?:\d+\.?\d*|\.\d+)(?:e[-+]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def parse_float(text: str) -> float:
    """Float literal, also accepting ``pi``, ``2pi``, ``0.5*pi``, ``pi/2``."""
    s = text.strip().lower()
    try:
        value = float(s)
    except ValueError:
        m = _PI_RE.match(s)
        if not m:
            raise ConfigError(f"not a number: {text!r}") from None
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        value = sign * coef * math.pi / (float(m.group(3)) if m.group(3) else 1.0)
    if not math.isfinite(value):
        raise ConfigError(f"value must be finite: {text!r}")
    return value


def parse_int(text: str) -> int:
    s = text.strip()
    try:
        return int(s)
    except ValueError:
        pass
    try:
        f = float(s)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None
    if not f.is_integer():
        raise ConfigError(f"not an integer: {text!r}")
    return int(f)


def parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("true", "yes", "1", "on"):
        return True
    if s in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_floats(text: str) -> Tuple[float, ...]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if not parts:
        raise ConfigError("empty list")
    return tuple(parse_float(p) for p in parts)


def _choice(options):
    def parse(text: str) -> str:
        s = text.strip()
        if s not in options:
            raise ConfigError(f"{s!r} is not one of {', '.join(options)}")
        return s
    return parse


def _text(text: str) -> str:
    return text.strip()


def _opt(parser, default, auto=False):
    return field(default=default, metadata={"parser": parser, "auto": auto})


@dataclass(frozen=True)
class RunConfig:
    """All inputs of a CLI run.  ``None`` means ``auto``."""

    mode: str = _opt(_choice(MODES), "qfi")
    # physics
    N: int = _opt(parse_int, 10)
    g: float = _opt(parse_float, 1.0)
    omega_p: float = _opt(parse_float, 10.0)
    omega_a: Optional[float] = _opt(parse_float, None, auto=True)
    n1: int = _opt(parse_int, 0)
    n2: Optional[int] = _opt(parse_int, None, auto=True)
    t1: Optional[float] = _opt(parse_float, None, auto=True)
    t2: float = _opt(parse_float, 0.0)
    theta: float = _opt(parse_float, 0.0)
    # probe
    probe: str = _opt(_choice(PROBES), "polarized")
    probe_sign: int = _opt(parse_int, 1)
    a: float = _opt(parse_float, 1.0)
    b: float = _opt(parse_float, 0.0)
    phi: float = _opt(parse_float, 0.0)
    phi0: float = _opt(parse_float, 0.0)
    beta: float = _opt(parse_float, 1.0)
    weights: Optional[Tuple[float, ...]] = _opt(parse_floats, None, auto=True)
    frame_t1: Optional[float] = _opt(parse_float, None, auto=True)
    # ancilla and schedule
    ancilla: str = _opt(_choice(("plus", "minus", "ground", "excited", "bloch")), "plus")
    ancilla_polar: float = _opt(parse_float, 0.0)
    ancilla_azimuth: float = _opt(parse_float, 0.0)
    schedule: str = _opt(_choice(("synchronous", "measurement_delay", "encoding_delay")), "synchronous")
    dt: float = _opt(parse_float, 0.0)
    # sweep
    axis: Optional[str] = _opt(_choice(AXES), None, auto=True)
    start: Optional[float] = _opt(parse_float, None, auto=True)
    stop: Optional[float] = _opt(parse_float, None, auto=True)
    points: int = _opt(parse_int, 11)
    endpoint: bool = _opt(parse_bool, True)
    measure: str = _opt(_choice(MEASURES), "qfi")
    # evaluation and output
    method: str = _opt(_choice(METHODS), "auto")
    strict: bool = _opt(parse_bool, True)
    cfi_limit: bool = _opt(parse_bool, False)
    format: str = _opt(_choice(FORMATS), "csv")
    out: Optional[str] = _opt(_text, None, auto=True)
    tol: Optional[float] = _opt(parse_float, None, auto=True)
    jobs: int = _opt(parse_int, 1)
    figure: Optional[str] = _opt(_text, None, auto=True)

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError(f"sweep needs points >= 2, got {self.points}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.mode == "sweep":
            if self.axis is None or self.start is None or self.stop is None:
                raise ConfigError("sweep needs axis, start and stop")
            if self.axis == "N" and (self.start < 1 or self.stop < 1):
                raise ConfigError("N axis bounds must be >= 1")
            if self.axis in ("t1", "t2", "dt") and (self.start < 0 or self.stop < 0):
                raise ConfigError(f"{self.axis} axis bounds must be non-negative")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def parse_value(key: str, text: str) -> Any:
    try:
        f = FIELDS[key]
    except KeyError:
        raise ConfigError(f"unknown config key {key!r}") from None
    if f.metadata["auto"] and text.strip().lower() == "auto":
        return None
    try:
        return f.metadata["parser"](text)
    except ConfigError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_text(text: str) -> Dict[str, Any]:
    """Parse ``key = value`` lines into a dict; ``#`` starts a comment."""
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = parse_value(key, value)
    return values


def build(values: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load(path, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read a config file and apply already-parsed overrides on top."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    values = parse_text(text)
    values.update(overrides or {})
    return build(values)


def format_value(value: Any) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def dumps(config: RunConfig) -> str:
    return "".join(f"{name} = {format_value(getattr(config, name))}\n" for name in FIELDS)


def loads(text: str) -> RunConfig:
    return build(parse_text(text))
