"""Scenario configuration: JSON schema, defaults and validation.

A config file is a JSON object; every key is optional and unknown keys are
rejected.  ``{"frequency": 1e10}`` yields the full default scenario (see the
defaults table in the README).  ``layout`` picks the default receiver
placement when ``assignments`` is omitted.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

LAYOUTS = {
    "axial": ((1, (0.0, 0.0, 0.3)), (2, (0.0, 0.0, 0.5))),
    "lateral": ((1, (-0.15, 0.0, 0.4)), (2, (0.15, 0.0, 0.4))),
}


def _complex(v, name):
    if isinstance(v, complex):
        return v
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError("expected a number or a [re, im] pair", name)


def _vec3(v, name):
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ConfigError("expected a list of three coordinates", name)
    out = tuple(float(c) for c in v)
    if not all(math.isfinite(c) for c in out):
        raise ConfigError("coordinates must be finite", name)
    return out


@dataclass(frozen=True)
class SurfaceConfig:
    rows: int = 28
    cols: int = 28
    period: float = 0.015

    def __post_init__(self):
        if self.rows < 1:
            raise ConfigError("must be >= 1", "rows")
        if self.cols < 1:
            raise ConfigError("must be >= 1", "cols")
        if not self.period > 0:
            raise ConfigError("must be > 0", "period")


@dataclass(frozen=True)
class SourceConfig:
    kind: str = "discrete-uca"
    position: tuple = (0.0, 0.0, -0.5)
    divergence_deg: float = 25.0
    elements_per_ring: int = 8
    element_amplitude: complex = 1 + 0j
    beta_ref: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("analytic", "discrete-uca"):
            raise ConfigError("must be 'analytic' or 'discrete-uca'", "kind")
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        if not self.position[2] < 0:
            raise ConfigError("source must lie at z < 0", "position")
        if not 0 < self.divergence_deg < 90:
            raise ConfigError("must lie in (0, 90)", "divergence_deg")
        if self.elements_per_ring < 2:
            raise ConfigError("must be >= 2", "elements_per_ring")
        object.__setattr__(self, "element_amplitude",
                           _complex(self.element_amplitude, "element_amplitude"))
        table = {}
        for key, v in dict(self.beta_ref).items():
            try:
                mode = int(key)
            except ValueError:
                raise ConfigError(f"mode key {key!r} is not an integer", "beta_ref") from None
            table[mode] = _complex(v, f"beta_ref.{key}")
            if table[mode] == 0:
                raise ConfigError("magnitude must be > 0", f"beta_ref.{key}")
        object.__setattr__(self, "beta_ref", table)


@dataclass(frozen=True)
class AssignmentConfig:
    mode: int
    target: tuple
    beta_obj: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "target", _vec3(self.target, "target"))
        if not self.target[2] > 0:
            raise ConfigError("target must lie at z > 0", "target")
        object.__setattr__(self, "beta_obj", _complex(self.beta_obj, "beta_obj"))
        if self.beta_obj == 0:
            raise ConfigError("magnitude must be > 0", "beta_obj")


@dataclass(frozen=True)
class MaskConfig:
    alpha_deg: float = 0.0

    def __post_init__(self):
        if not 0 <= self.alpha_deg < 90:
            raise ConfigError("must lie in [0, 90)", "alpha_deg")


@dataclass(frozen=True)
class HologramConfig:
    normalize_amplitude: bool = True
    converging: bool = True


@dataclass(frozen=True)
class QuantizationConfig:
    levels: int = 4
    insertion_loss_db: float = 0.0

    def __post_init__(self):
        if self.levels < 2:
            raise ConfigError("must be >= 2", "levels")
        if not self.insertion_loss_db >= 0:
            raise ConfigError("must be >= 0", "insertion_loss_db")


@dataclass(frozen=True)
class ScanConfig:
    plane: str = "xz"
    fixed: float = 0.0
    u_range: tuple = (-0.3, 0.3)
    v_range: tuple = (0.05, 0.8)
    resolution: tuple = (201, 251)
    floor_db: float = -15.0
    min_separation: float = 0.015

    def __post_init__(self):
        if self.plane not in ("xz", "xy", "yz"):
            raise ConfigError("must be one of xz, xy, yz", "plane")
        for name in ("u_range", "v_range"):
            r = tuple(float(c) for c in getattr(self, name))
            if len(r) != 2 or not r[1] > r[0]:
                raise ConfigError("must be [lo, hi] with hi > lo", name)
            object.__setattr__(self, name, r)
        res = tuple(int(c) for c in self.resolution)
        if len(res) != 2 or min(res) < 2:
            raise ConfigError("must be two counts >= 2", "resolution")
        object.__setattr__(self, "resolution", res)
        if not self.floor_db < 0:
            raise ConfigError("must be < 0", "floor_db")
        if not self.min_separation > 0:
            raise ConfigError("must be > 0", "min_separation")


@dataclass(frozen=True)
class LinkSection:
    snr_db: tuple = tuple(float(s) for s in range(0, 16))
    seed: int = 2025
    batch_symbols: int = 65536
    min_errors: int = 100
    max_bits: int = 10_000_000
    constellation_cap: int = 2000
    fec_threshold: float = 3.8e-3

    def __post_init__(self):
        grid = tuple(float(s) for s in self.snr_db)
        if not grid:
            raise ConfigError("must not be empty", "snr_db")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("must be strictly increasing", "snr_db")
        object.__setattr__(self, "snr_db", grid)
        if not 0 <= self.seed < 2**64:
            raise ConfigError("must be a 64-bit unsigned integer", "seed")
        for name in ("batch_symbols", "max_bits"):
            if getattr(self, name) < 1:
                raise ConfigError("must be >= 1", name)
        if self.min_errors < 0:
            raise ConfigError("must be >= 0", "min_errors")
        if self.constellation_cap < 0:
            raise ConfigError("must be >= 0", "constellation_cap")
        if not 0 < self.fec_threshold < 0.5:
            raise ConfigError("must lie in (0, 0.5)", "fec_threshold")


_SECTIONS = {
    "surface": SurfaceConfig,
    "source": SourceConfig,
    "mask": MaskConfig,
    "hologram": HologramConfig,
    "quantization": QuantizationConfig,
    "scan": ScanConfig,
    "link": LinkSection,
}


@dataclass(frozen=True)
class ScenarioConfig:
    frequency: float = 10e9
    layout: str = "axial"
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    assignments: tuple = ()
    mask: MaskConfig = field(default_factory=MaskConfig)
    hologram: HologramConfig = field(default_factory=HologramConfig)
    quantization: QuantizationConfig = field(default_factory=QuantizationConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    link: LinkSection = field(default_factory=LinkSection)

    def __post_init__(self):
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise ConfigError("must be > 0", "frequency")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"must be one of {sorted(LAYOUTS)}", "layout")
        if not self.assignments:
            object.__setattr__(self, "assignments", tuple(
                AssignmentConfig(mode, target) for mode, target in LAYOUTS[self.layout]
            ))
        modes = [a.mode for a in self.assignments]
        if len(set(modes)) != len(modes):
            raise ConfigError(f"modes must be distinct, got {modes}", "assignments")
        _validate_domain(self)

    def to_dict(self) -> dict:
        return _encode(self)

    def sha256(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _validate_domain(cfg: ScenarioConfig):
    # Re-check every module-level invariant by building the domain objects.
    from . import scenario

    scenario.Scenario(cfg)


def _encode(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _encode(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (tuple, list)):
        return [_encode(v) for v in obj]
    return obj


_SCALAR_TYPES = {"int": int, "float": float, "bool": bool, "str": str}


def _coerce(cls, name, value, path):
    """Type-check a scalar entry against the annotation of ``cls.name``."""
    ann = {f.name: f.type for f in dataclasses.fields(cls)}[name]
    kind = _SCALAR_TYPES.get(ann if isinstance(ann, str) else getattr(ann, "__name__", ""))
    if kind is None:
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("expected true or false", path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError("expected an integer", path)
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("expected a number", path)
        return float(value)
    if not isinstance(value, str):
        raise ConfigError("expected a string", path)
    return value


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path or None)
    names = [f.name for f in dataclasses.fields(cls)]
    unknown = sorted(set(data) - set(names))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError("unknown key", where)
    kwargs = {}
    for key, value in data.items():
        sub = f"{path}.{key}" if path else key
        kwargs[key] = _coerce(cls, key, value, sub)
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        if exc.field and path:
            raise ConfigError(str(exc).split(": ", 1)[-1], f"{path}.{exc.field}") from None
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path or None) from None


def from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    data = dict(data)
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _build(cls, data.pop(name), name)
    if "assignments" in data:
        items = data.pop("assignments")
        if not isinstance(items, list):
            raise ConfigError("expected a list", "assignments")
        kwargs["assignments"] = tuple(
            _build(AssignmentConfig, a, f"assignments[{i}]") for i, a in enumerate(items)
        )
    for key in list(data):
        if key not in ("frequency", "layout"):
            raise ConfigError("unknown key", key)
        kwargs[key] = _coerce(ScenarioConfig, key, data.pop(key), key)
    return ScenarioConfig(**kwargs)


def loads(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return loads(p.read_text())


def dumps(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps(cfg))
