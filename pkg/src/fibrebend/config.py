"""Run configuration files and output manifests.

Configs are INI-style key = value files read with configparser.  Section keys
map straight onto the dataclass fields they override, so the casting rules
come from the field annotations rather than a second schema.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from pathlib import Path

from .geometry import ActuatorSpec, GeometryAParams, GeometryBParams, build_geometry_a, build_geometry_b
from .fiberpath import WindingSpec
from .mechanics import DeviceSpec, ModelConstants, SegmentModel
from .postprocess import PressureSchedule


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    """Read an INI config into {section: {key: raw string}}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep field-name case
    text = Path(path).read_text()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def _cast(raw: str, annotation: str):
    ann = str(annotation)
    if raw.lower() in ("none", "null") and "None" in ann:
        return None
    if "bool" in ann:
        if raw.lower() in ("true", "yes", "1", "on"):
            return True
        if raw.lower() in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if "int" in ann and "float" not in ann:
        return int(raw)
    if "float" in ann:
        return float(raw)
    return raw


def apply_section(cls, section: dict, **fixed):
    """Build dataclass cls from a config section, casting by field annotation."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = dict(fixed)
    for key, raw in section.items():
        if key in fixed:
            continue
        if key not in fields:
            raise ConfigError(f"unknown key {key!r} for {cls.__name__}")
        try:
            kwargs[key] = _cast(raw, fields[key].type)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
    return cls(**kwargs)


def geometry_from_config(cfg: dict) -> ActuatorSpec:
    section = dict(cfg.get("geometry", {}))
    kind = section.pop("kind", "A").strip().upper()
    if kind == "A":
        return build_geometry_a(apply_section(GeometryAParams, section))
    if kind == "B":
        return build_geometry_b(apply_section(GeometryBParams, section))
    raise ConfigError(f"unknown geometry kind {kind!r}; expected A or B")


def winding_from_config(cfg: dict, **overrides) -> WindingSpec:
    spec = apply_section(WindingSpec, cfg.get("winding", {}), **overrides)
    spec.validate()
    return spec


def schedule_from_config(cfg: dict) -> PressureSchedule:
    section = dict(cfg.get("schedule", {}))
    kind = section.pop("kind", "proportional").strip()
    points = section.pop("points", None)
    fields = {f.name: f for f in dataclasses.fields(PressureSchedule)}
    kwargs = {}
    for key, raw in section.items():
        if key not in fields:
            raise ConfigError(f"unknown key {key!r} for PressureSchedule")
        kwargs[key] = _cast(raw, fields[key].type)
    if kind == "proportional":
        return PressureSchedule.proportional(**kwargs)
    if kind == "stepped":
        return PressureSchedule.stepped(**kwargs)
    if kind == "explicit":
        if kwargs:
            raise ConfigError(f"explicit schedule takes only points, got {sorted(kwargs)}")
        if not points:
            raise ConfigError("explicit schedule needs points = t:p, t:p, ...")
        parsed = []
        for chunk in points.split(","):
            t_raw, _, p_raw = chunk.partition(":")
            try:
                parsed.append((float(t_raw), float(p_raw)))
            except ValueError as exc:
                raise ConfigError(f"bad schedule point {chunk!r}") from exc
        return PressureSchedule.explicit(parsed)
    raise ConfigError(f"unknown schedule kind {kind!r}")


def segment_model_from_config(cfg: dict) -> SegmentModel:
    section = dict(cfg.get("model", {}))
    const_fields = {f.name for f in dataclasses.fields(ModelConstants)}
    const_kwargs = {}
    for key in list(section):
        if key in const_fields:
            const_kwargs[key] = float(section.pop(key))
    constants = ModelConstants(**const_kwargs) if const_kwargs else ModelConstants()
    return apply_section(SegmentModel, section, constants=constants)


def device_from_config(cfg: dict) -> DeviceSpec:
    device = apply_section(DeviceSpec, cfg.get("device", {}))
    device.validate()
    return device


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir, command: str, inputs: dict, outputs, status: str = "ok",
                   extra: dict | None = None) -> Path:
    """Write manifest.json next to the outputs.

    No timestamps on purpose: reruns with identical inputs must be
    byte-identical, manifest included.
    """
    import matplotlib
    import numpy

    from . import __version__

    manifest = {
        "command": command,
        "status": status,
        "inputs": {label: {"path": str(p), "sha256": sha256_file(p)}
                   for label, p in sorted(inputs.items())},
        "outputs": sorted(str(name) for name in outputs),
        "versions": {
            "fibrebend": __version__,
            "numpy": numpy.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }
    if extra:
        manifest["run"] = extra
    out = Path(out_dir) / "manifest.json"
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out
