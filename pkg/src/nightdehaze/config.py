"""Pipeline configuration: one flat key-value file covering every parameter.

Format: ``section.key = value`` lines, ``#`` comments, blank lines ignored.
Booleans are ``true``/``false``, the Gaussian scale list is comma-separated,
and the two airlight sigmas accept ``auto`` (derive from image size).  Every
key has a default, so an empty file is a valid full configuration.  Parsing
then serializing (or the reverse) is lossless: floats are written with repr
so the round trip is exact.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from pathlib import Path

from .airlight import AirlightParams
from .enhance import EnhanceParams
from .fusion import FusionParams
from .star import StarParams
from .transmittance import BoundaryParams, CorrectionParams, DcpParams


class ConfigError(Exception):
    """Malformed, unknown, or out-of-range configuration input."""


@dataclass
class PipelineConfig:
    dcp: DcpParams = field(default_factory=DcpParams)
    boundary: BoundaryParams = field(default_factory=BoundaryParams)
    correction: CorrectionParams = field(default_factory=CorrectionParams)
    airlight: AirlightParams = field(default_factory=AirlightParams)
    star: StarParams = field(default_factory=StarParams)
    enhance: EnhanceParams = field(default_factory=EnhanceParams)
    fusion: FusionParams = field(default_factory=FusionParams)
    skip_t_correction: bool = False
    skip_dehaze: bool = False
    skip_star: bool = False
    debug_dump: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


# section name -> (attribute path into PipelineConfig, keys excluded there)
_PIPELINE_KEYS = ("skip_t_correction", "skip_dehaze", "skip_star", "debug_dump", "threads")
_SECTION_ORDER = (
    "dcp",
    "boundary",
    "correction",
    "airlight",
    "star",
    "msrcr",
    "enhance",
    "fusion",
    "pipeline",
)
# keys where the string "auto" means None
_OPTIONAL_FLOAT_KEYS = {("airlight", "sigma_coarse"), ("airlight", "sigma_fine")}


def _section_object(cfg: PipelineConfig, section: str):
    if section == "pipeline":
        return cfg
    if section == "msrcr":
        return cfg.enhance.msrcr
    return getattr(cfg, section)


def _section_keys(cfg: PipelineConfig, section: str) -> tuple[str, ...]:
    if section == "pipeline":
        return _PIPELINE_KEYS
    obj = _section_object(cfg, section)
    names = tuple(f.name for f in dataclasses.fields(obj))
    if section == "enhance":
        names = tuple(n for n in names if n != "msrcr")
    return names


def _parse_value(section: str, key: str, raw: str, current):
    if (section, key) in _OPTIONAL_FLOAT_KEYS:
        return None if raw == "auto" else float(raw)
    if isinstance(current, bool):
        low = raw.lower()
        if low not in ("true", "false"):
            raise ValueError(f"expected true/false, got {raw!r}")
        return low == "true"
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, tuple):
        return tuple(float(part.strip()) for part in raw.split(","))
    return float(raw)


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> PipelineConfig:
    """Build a validated PipelineConfig from file text; defaults fill gaps."""
    overrides: dict[str, dict[str, object]] = {}
    defaults = PipelineConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        name, _, raw = body.partition("=")
        name = name.strip()
        raw = raw.strip()
        if "." not in name:
            raise ConfigError(f"line {lineno}: key {name!r} lacks a section prefix")
        section, _, key = name.partition(".")
        if section not in _SECTION_ORDER:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        if key not in _section_keys(defaults, section):
            raise ConfigError(f"line {lineno}: unknown key {name!r}")
        current = getattr(_section_object(defaults, section), key)
        try:
            value = _parse_value(section, key, raw, current)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {name!r}: {exc}") from exc
        overrides.setdefault(section, {})[key] = value

    cfg = PipelineConfig()
    try:
        for section, fields_map in overrides.items():
            if section == "pipeline":
                cfg = replace(cfg, **fields_map)
            elif section == "msrcr":
                cfg.enhance = replace(
                    cfg.enhance, msrcr=replace(cfg.enhance.msrcr, **fields_map)
                )
            else:
                setattr(cfg, section, replace(_section_object(cfg, section), **fields_map))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def serialize_config(cfg: PipelineConfig) -> str:
    """Canonical full listing of a configuration; parse() inverts it exactly."""
    lines = []
    for section in _SECTION_ORDER:
        obj = _section_object(cfg, section)
        for key in _section_keys(cfg, section):
            lines.append(f"{section}.{key} = {_format_value(getattr(obj, key))}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> PipelineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
