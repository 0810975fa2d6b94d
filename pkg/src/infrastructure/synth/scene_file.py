"""Scene descriptions as flat key=value files.

Uses the dotted layout of pipeline config files; objects are numbered::

    rotation=[0.1,0.15,0.25]
    background.kind=grid
    objects.0.center=[90.0,110.0]
    objects.0.velocity=[1200.0,200.0]
"""

from dataclasses import asdict, fields
from pathlib import Path
from typing import Any

from ...core.exceptions import ArgumentError, ConfigurationError
from ...domain.entities.events import CameraIntrinsics
from ..io.config_file import flatten, nest
from ..io.text_formats import read_key_values, write_key_values
from .generator import BackgroundSpec, ObjectSpec, SceneSpec


def _build(cls: type, values: Any, where: str) -> Any:
    if not isinstance(values, dict):
        raise ConfigurationError(f"{where}: expected a section")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {', '.join(unknown)}")
    converted = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    try:
        return cls(**converted)
    except ArgumentError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{where}: {e}") from e


def scene_to_mapping(spec: SceneSpec) -> dict[str, str]:
    """Flatten a scene to dotted keys."""
    tree = asdict(spec)
    tree["objects"] = {str(i): obj for i, obj in enumerate(tree["objects"])}
    return flatten(tree)


def scene_from_mapping(flat: dict[str, str]) -> SceneSpec:
    """Rebuild and validate a scene; missing keys take their defaults.

    Raises:
        ConfigurationError: Unknown key or wrong value type
        ArgumentError: Value out of range
    """
    tree = nest(flat)
    values: dict[str, Any] = {}
    for key, value in tree.items():
        if key == "geometry":
            defaults = asdict(CameraIntrinsics.davis346())
            values[key] = _build(CameraIntrinsics, {**defaults, **value}, key)
        elif key == "background":
            values[key] = _build(BackgroundSpec, value, key)
        elif key == "objects":
            if not isinstance(value, dict) or not all(k.isdigit() for k in value):
                raise ConfigurationError("objects: expected numbered sections")
            values[key] = tuple(_build(ObjectSpec, value[k], f"objects.{k}") for k in sorted(value, key=int))
        else:
            values[key] = value
    spec = _build(SceneSpec, values, "scene")
    spec.validate()
    return spec


def load_scene_file(path: Path) -> SceneSpec:
    """Read a scene file."""
    return scene_from_mapping(read_key_values(path))


def dump_scene_file(spec: SceneSpec, path: Path) -> None:
    """Write a scene file :func:`load_scene_file` reads back to an equal spec."""
    write_key_values(path, scene_to_mapping(spec), header="jstr synthetic scene")

