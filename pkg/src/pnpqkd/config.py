"""System configuration and its plain-text ``key = value`` file format.

File format::

    # comment (also ';')
    [fiber]
    loss_db_per_km = 0.17

    [detector1]
    quantum_efficiency = 0.1

    # a dotted key outside any section is equivalent
    stray.enabled = false

Sections are ``fiber``, ``interferometer``, ``detector1``, ``detector2``,
``source``, ``stray`` and ``run``. Keys left out keep the experiment's
values; unknown sections or keys are errors. Every error names the line.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field, replace

from .detection import DetectorMode, DetectorSpec
from .errors import ConfigError, ParameterError
from .noise import StrayLightModel
from .optics import FiberSpec, InterferometerSpec

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SourceSpec:
    mean_photon_number: float = 0.1
    rep_rate_hz: float = 5e5
    laser_pulse_width_ns: float = 0.5
    pm_window_ns: float = 20.0


@dataclass(frozen=True)
class SystemConfig:
    """All physical and protocol parameters of one plug-and-play link.

    Defaults reproduce the 100 km experiment: mu = 0.1 photon/pulse leaving
    Alice, 500 kHz repetition, 0.25 dB/km fibre, two balanced APDs at 10%
    efficiency and 2e-7 dark counts per gate, 1.2e-6 stray counts per pulse.
    """

    fiber: FiberSpec = field(default_factory=FiberSpec)
    interferometer: InterferometerSpec = field(default_factory=InterferometerSpec)
    detector1: DetectorSpec = field(default_factory=DetectorSpec)
    detector2: DetectorSpec = field(default_factory=DetectorSpec)
    mean_photon_number: float = 0.1
    rep_rate_hz: float = 5e5
    laser_pulse_width_ns: float = 0.5
    pm_window_ns: float = 20.0
    stray: StrayLightModel = field(default_factory=StrayLightModel)
    seed: int = 0

    def __post_init__(self):
        for name in ("mean_photon_number", "rep_rate_hz", "laser_pulse_width_ns", "pm_window_ns"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ParameterError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")

    @property
    def source(self) -> SourceSpec:
        return SourceSpec(self.mean_photon_number, self.rep_rate_hz,
                          self.laser_pulse_width_ns, self.pm_window_ns)

    def at_distance(self, distance_km: float) -> "SystemConfig":
        return replace(self, fiber=replace(self.fiber, length_km=float(distance_km)))

    def without_stray(self) -> "SystemConfig":
        return replace(self, stray=replace(self.stray, enabled=False))


_SECTIONS = {
    "fiber": FiberSpec,
    "interferometer": InterferometerSpec,
    "detector1": DetectorSpec,
    "detector2": DetectorSpec,
    "source": SourceSpec,
    "stray": StrayLightModel,
    "run": None,
}


def _field_names(section):
    if section == "run":
        return ("seed",)
    return tuple(f.name for f in dataclasses.fields(_SECTIONS[section]))


def _parse_bool(text):
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_value(key, text):
    if key == "enabled":
        return _parse_bool(text)
    if key == "mode":
        return DetectorMode(text.lower())
    if key == "seed":
        return int(text, 0)
    return float(text)


def parse_config(text: str, path=None) -> SystemConfig:
    """Parse config file contents; see the module docstring for the format."""
    values = {name: {} for name in _SECTIONS}
    lines_of = {name: {} for name in _SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", path, lineno)
            section = line[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", path, lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        target = section
        if "." in key:
            if section is not None:
                raise ConfigError(f"dotted key {key!r} not allowed inside [{section}]", path, lineno)
            target, key = key.split(".", 1)
            if target not in _SECTIONS:
                raise ConfigError(f"unknown section {target!r}", path, lineno)
        if target is None:
            raise ConfigError(f"key {key!r} outside any section", path, lineno)
        if key not in _field_names(target):
            raise ConfigError(f"unknown key {key!r} in [{target}]", path, lineno)
        if key in values[target]:
            raise ConfigError(f"duplicate key {target}.{key}", path, lineno)
        try:
            values[target][key] = _parse_value(key, value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {target}.{key}: {exc}", path, lineno) from None
        lines_of[target][key] = lineno

    def build(name, cls):
        try:
            return cls(**values[name])
        except ParameterError as exc:
            lineno = next((n for k, n in lines_of[name].items() if k in str(exc)), None)
            raise ConfigError(f"[{name}] {exc}", path, lineno) from None

    source = build("source", SourceSpec)
    try:
        return SystemConfig(
            fiber=build("fiber", FiberSpec),
            interferometer=build("interferometer", InterferometerSpec),
            detector1=build("detector1", DetectorSpec),
            detector2=build("detector2", DetectorSpec),
            stray=build("stray", StrayLightModel),
            **dataclasses.asdict(source),
            **values["run"],
        )
    except ParameterError as exc:
        merged = {**lines_of["source"], **lines_of["run"]}
        lineno = next((n for k, n in merged.items() if k in str(exc)), None)
        raise ConfigError(str(exc), path, lineno) from None


def load_config(path) -> SystemConfig:
    if not os.path.isfile(path):
        raise ConfigError("config file not found", path)
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, DetectorMode):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: SystemConfig) -> str:
    """Serialise every field; ``parse_config(dump_config(c)) == c``."""
    blocks = []
    for name in _SECTIONS:
        if name == "run":
            items = {"seed": config.seed}
        elif name == "source":
            items = dataclasses.asdict(config.source)
        else:
            obj = getattr(config, name)
            items = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        body = "\n".join(f"{k} = {_format(v)}" for k, v in items.items())
        blocks.append(f"[{name}]\n{body}\n")
    return "\n".join(blocks)
