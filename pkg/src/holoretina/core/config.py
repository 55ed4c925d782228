"""
Run configuration: line-based ``key = value`` files with '#' comments.

Every key has a default, unknown or repeated keys are rejected, and each run
echoes the fully resolved configuration as YAML next to its outputs.
"""

from __future__ import annotations

import logging
import typing
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap

from holoretina.core.design import MODES, SystemGeometry
from holoretina.core.dispersion import DispersionTable, bundled_dispersion_path, load_dispersion
from holoretina.core.eye import PLANES, EyeGeometry
from holoretina.core.layout import CLIP_POLICIES, FORMATS
from holoretina.core.pb import Helicity, PBElement
from holoretina.core.sweep import parse_range
from holoretina.errors import ConfigError, InputError

logger = logging.getLogger(__name__)

NM = 1e-9
RESOLVED_CONFIG = "resolved_config.yaml"
DEFAULT_CONFIG_NAME = "holoretina.conf"
MAX_SEED = 2**64 - 1

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass(frozen=True)
class RunConfig:
    # system
    aperture_m: float = 500e-6
    pixels: int = 10
    conjugate_distance_m: float = 0.25
    magnification: float = 100.0
    wavelength_m: float = 543e-9
    # eye
    focal_length_m: float = 0.017
    retina_distance_m: float = 0.025
    # design
    grid_n: int = 2048
    levels: int = 8
    mode: str = "per_cell"
    seed: int = 0
    gs_iterations: int = 50
    # simulate
    input_helicity: str = "R"
    t_te: complex = 1 + 0j
    t_tm: complex = -1 + 0j
    analyzer: bool = False
    coherent: bool = False
    plane: str = "retina"
    png: bool = False
    accommodation_min_m: float = 0.0
    accommodation_max_m: float = 0.0
    accommodation_steps: int = 0
    # grating
    dispersion_file: str = ""
    gap_index: float = 1.0
    lambda_nm: str = "543"
    period_nm: str = "230"
    width_nm: str = "70"
    thickness_nm: str = "100:250:5"
    harmonics: int = 15
    substrate_index: float = 1.46
    cover_index: float = 1.0
    weight_amplitude: float = 1.0
    weight_phase: float = 1.0
    subwavelength_only: bool = True
    workers: int = 1
    # layout
    unit_cell_nm: float = 230.0
    beam_width_nm: float = 70.0
    beam_length_nm: float = 180.0
    clip_policy: str = "strict"
    layout_formats: str = "json,csv,svg"
    svg_max_beams: int = 20000

    def __post_init__(self):
        positive = (
            "aperture_m", "conjugate_distance_m", "magnification", "wavelength_m", "focal_length_m",
            "retina_distance_m", "substrate_index", "cover_index", "gap_index", "unit_cell_nm",
            "beam_width_nm", "beam_length_nm",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("pixels", "grid_n", "gs_iterations", "workers", "svg_max_beams"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.grid_n % 2:
            raise ConfigError(f"grid_n must be even, got {self.grid_n}")
        if self.levels < 0 or self.levels == 1:
            raise ConfigError(f"levels must be 0 (continuous) or >= 2, got {self.levels}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.harmonics < 5:
            raise ConfigError(f"harmonics must be >= 5, got {self.harmonics}")
        if self.weight_amplitude < 0 or self.weight_phase < 0:
            raise ConfigError("objective weights must be nonnegative")
        self._choice("mode", MODES)
        self._choice("plane", PLANES)
        self._choice("clip_policy", CLIP_POLICIES)
        self._choice("input_helicity", tuple(h.value for h in Helicity))
        unknown = set(self.formats) - set(FORMATS)
        if unknown or not self.formats:
            raise ConfigError(f"layout_formats must be a comma list of {FORMATS}, got {self.layout_formats!r}")
        if self.accommodation_steps:
            if self.accommodation_steps < 3:
                raise ConfigError("accommodation_steps must be 0 (off) or >= 3")
            if not 0 < self.accommodation_min_m < self.accommodation_max_m:
                raise ConfigError("accommodation sweep needs 0 < accommodation_min_m < accommodation_max_m")
        for name in ("lambda_nm", "period_nm", "width_nm", "thickness_nm"):
            try:
                values = parse_range(getattr(self, name))
            except InputError as e:
                raise ConfigError(f"{name}: {e}") from e
            if not values or min(values) <= 0:
                raise ConfigError(f"{name} must list positive lengths, got {getattr(self, name)!r}")

    def _choice(self, name: str, allowed) -> None:
        if getattr(self, name) not in allowed:
            raise ConfigError(f"{name} must be one of {', '.join(allowed)}, got {getattr(self, name)!r}")

    @property
    def formats(self) -> List[str]:
        return [f.strip() for f in self.layout_formats.split(",") if f.strip()]

    @property
    def pitch(self) -> float:
        return self.aperture_m / self.grid_n

    def geometry(self) -> SystemGeometry:
        return SystemGeometry(
            self.aperture_m, self.pixels, self.conjugate_distance_m, self.magnification, self.wavelength_m
        )

    def eye(self) -> EyeGeometry:
        return EyeGeometry(self.focal_length_m, self.retina_distance_m)

    def element(self) -> PBElement:
        return PBElement(self.t_te, self.t_tm)

    def helicity(self) -> Helicity:
        return Helicity.parse(self.input_helicity)

    def beam_material(self) -> DispersionTable:
        path = Path(self.dispersion_file) if self.dispersion_file else bundled_dispersion_path()
        return load_dispersion(path)

    def sweep_axes(self) -> Dict[str, List[float]]:
        """Sweep ranges in meters, keyed by axis."""
        return {
            "wavelengths": [v * NM for v in parse_range(self.lambda_nm)],
            "periods": [v * NM for v in parse_range(self.period_nm)],
            "widths": [v * NM for v in parse_range(self.width_nm)],
            "thicknesses": [v * NM for v in parse_range(self.thickness_nm)],
        }

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Apply non-None overrides (from CLI flags)."""
        chosen = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(chosen) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(sorted(unknown))}")
        return replace(self, **chosen) if chosen else self

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = _format_value(value) if isinstance(value, complex) else value
        return out


def _format_value(value: complex) -> str:
    if value.imag == 0:
        return repr(value.real)
    return repr(value).strip("()")


def _field_types() -> Dict[str, Any]:
    return typing.get_type_hints(RunConfig)


def _convert(key: str, raw: str, kind: Any, source: str) -> Any:
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"expected a boolean, got {text!r}")
        if kind is int:
            return int(text, 0)
        if kind is float:
            return float(text)
        if kind is complex:
            return complex(text.replace(" ", "").replace("i", "j"))
        return text
    except ValueError as e:
        raise ConfigError(f"{source}: bad value for {key}: {e}") from e


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    kinds = _field_types()
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), 1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {content!r}")
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{number}: duplicate key {key!r}")
        values[key] = _convert(key, raw, kinds[key], f"{source}:{number}")
    logger.debug("parsed %d key(s) from %s", len(values), source)
    return RunConfig(**values)


def load_config(path: Optional[Union[str, Path]]) -> RunConfig:
    """Defaults when ``path`` is None."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, str(path))


def write_resolved_config(config: RunConfig, out_dir: Union[str, Path], command: str) -> Path:
    out = Path(out_dir) / RESOLVED_CONFIG
    data = CommentedMap()
    data["command"] = command
    for key, value in config.to_dict().items():
        data[key] = value
    data.yaml_set_start_comment("fully resolved holoretina configuration")
    yaml = YAML()
    yaml.default_flow_style = False
    with open(out, "w", encoding="utf-8") as fh:
        yaml.dump(data, fh)
    return out


_SECTIONS = {
    "aperture_m": "system geometry",
    "focal_length_m": "eye model",
    "grid_n": "hologram design (pitch = aperture_m / grid_n)",
    "input_helicity": "eye simulation",
    "dispersion_file": "grating sweep; *_nm accept value, a,b,c or start:stop:step",
    "unit_cell_nm": "nanobeam layout",
}


def default_config_text() -> str:
    """Commented configuration listing every key at its default."""
    lines = ["# holoretina run configuration", "# key = value; '#' starts a comment"]
    for key, value in RunConfig().to_dict().items():
        if key in _SECTIONS:
            lines += ["", f"# {_SECTIONS[key]}"]
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


__all__ = [
    "DEFAULT_CONFIG_NAME",
    "RESOLVED_CONFIG",
    "RunConfig",
    "default_config_text",
    "load_config",
    "parse_config",
    "write_resolved_config",
]
