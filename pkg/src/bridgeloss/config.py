"""Analysis configuration loaded from a single TOML file.

Example::

    attenuation_db = 70
    gap_model = "interpolation"
    output_dir = "out"
    formats = ["csv", "json"]

    [materials.al]
    sigma_n = 8.7e7
    thickness = "500 nm"

    [fit]
    max_iter = 200
    weighting = "auto"

    [geometry]
    f_r0 = "6.15 GHz"
    l_g = "16 pH"

Unknown keys are rejected. ``BRIDGELOSS_CONFIG`` names a default file.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .conductivity import GAP_MODELS, PRESETS, SuperconductorParams
from .units import parse_quantity

ENV_VAR = "BRIDGELOSS_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 200
    ftol: float = 1e-12
    bootstrap: int = 0
    weighting: str = "auto"  # "auto": inverse variance when sigma present
    t_min: float = 0.4
    shared_q_other: bool = False
    min_decades: float = 4.0


@dataclass(frozen=True)
class GeometryOptions:
    f_r0: float = 6.15e9
    l_g: float = 16e-12
    length: float = 5e-3


@dataclass(frozen=True)
class AnalysisConfig:
    materials: dict = field(default_factory=lambda: dict(PRESETS))
    attenuation_db: float = 70.0
    gap_model: str = "interpolation"
    fit: FitOptions = FitOptions()
    geometry: GeometryOptions = GeometryOptions()
    output_dir: str = "."
    formats: tuple = ("csv", "json")
    trace_material: str = "ta"
    bridge_material: str = "al"
    source: dict = field(default_factory=dict, compare=False)

    def material(self, name):
        try:
            return self.materials[name.lower()]
        except KeyError:
            raise ConfigError(f"unknown material {name!r}; known: {sorted(self.materials)}") from None

    def digest(self):
        blob = json.dumps(self.source, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


_MATERIAL_UNITS = {"gap0": "J", "sigma_n": "S/m", "thickness": "m", "tc": "K", "alpha": None}
_TOP = {"materials", "attenuation_db", "gap_model", "fit", "geometry", "output_dir", "formats",
        "trace_material", "bridge_material"}


def _check_keys(section, data, allowed):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}")


def _material(name, data):
    allowed = set(_MATERIAL_UNITS) | {"base"}
    _check_keys(f"materials.{name}", data, allowed)
    base = PRESETS.get(str(data.get("base", name)).lower())
    values = {}
    for key, unit in _MATERIAL_UNITS.items():
        if key in data:
            values[key] = float(data[key]) if unit is None else parse_quantity(data[key], unit)
    if base is None:
        missing = {"gap0", "sigma_n", "thickness", "alpha"} - set(values)
        if missing:
            raise ConfigError(f"materials.{name}: new material needs {sorted(missing)}")
        return SuperconductorParams(name=name, **values)
    return base.replace(name=name, **values)


def config_from_dict(data):
    _check_keys("config", data, _TOP)
    materials = dict(PRESETS)
    for name, entry in data.get("materials", {}).items():
        if not isinstance(entry, dict):
            raise ConfigError(f"materials.{name} must be a table")
        materials[name.lower()] = _material(name.lower(), entry)
    fit_data = data.get("fit", {})
    _check_keys("fit", fit_data, {f.name for f in dataclasses.fields(FitOptions)})
    fit = FitOptions(**fit_data)
    if fit.weighting not in ("auto", "uniform"):
        raise ConfigError("fit.weighting must be 'auto' or 'uniform'")
    geo_data = data.get("geometry", {})
    _check_keys("geometry", geo_data, {f.name for f in dataclasses.fields(GeometryOptions)})
    units = {"f_r0": "Hz", "l_g": "H", "length": "m"}
    geometry = GeometryOptions(**{k: parse_quantity(v, units[k]) for k, v in geo_data.items()})
    gap_model = data.get("gap_model", "interpolation")
    if gap_model not in GAP_MODELS:
        raise ConfigError(f"gap_model must be one of {GAP_MODELS}")
    formats = tuple(data.get("formats", ("csv", "json")))
    if set(formats) - {"csv", "json"}:
        raise ConfigError("formats may contain only 'csv' and 'json'")
    cfg = AnalysisConfig(
        materials=materials,
        attenuation_db=float(data.get("attenuation_db", 70.0)),
        gap_model=gap_model,
        fit=fit,
        geometry=geometry,
        output_dir=str(data.get("output_dir", ".")),
        formats=formats,
        trace_material=str(data.get("trace_material", "ta")).lower(),
        bridge_material=str(data.get("bridge_material", "al")).lower(),
        source=data,
    )
    cfg.material(cfg.trace_material)
    cfg.material(cfg.bridge_material)
    return cfg


def load_config(path=None):
    """Load ``path``, else the file named by ``BRIDGELOSS_CONFIG``, else defaults."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return config_from_dict({})
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    try:
        return config_from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
