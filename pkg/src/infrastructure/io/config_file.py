"""Flat key=value configuration files with dotted section prefixes.

Values are JSON literals where they parse as such (numbers, booleans,
``null``, lists) and bare strings otherwise, e.g.::

    window.dt=0.02
    ransac.theta=2.0
    compensation.extrinsic=[[1,0,0],[0,1,0],[0,0,1]]
    method=joint
"""

import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from ...core.exceptions import ConfigurationError, EventParseError
from ...core.settings import PipelineSettings
from .text_formats import read_key_values, write_key_values


def _decode(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _encode(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, separators=(",", ":"))


def nest(flat: dict[str, str]) -> dict[str, Any]:
    """Turn dotted keys into nested dictionaries.

    Raises:
        ConfigurationError: If a key is both a value and a section
    """
    tree: dict[str, Any] = {}
    for key, raw in flat.items():
        *sections, leaf = key.split(".")
        node = tree
        for section in sections:
            child = node.setdefault(section, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"{key}: {section!r} is a value, not a section")
            node = child
        if isinstance(node.get(leaf), dict):
            raise ConfigurationError(f"{key}: is a section, not a value")
        node[leaf] = _decode(raw)
    return tree


def flatten(tree: dict[str, Any], prefix: str = "") -> dict[str, str]:
    """Inverse of :func:`nest`."""
    flat: dict[str, str] = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = _encode(value)
    return flat


def settings_from_mapping(values: dict[str, Any]) -> PipelineSettings:
    """Build settings from nested values; environment fills what is missing.

    Raises:
        ConfigurationError: If validation fails
    """
    try:
        return PipelineSettings(**values)
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {e}") from e


def load_config_file(path: Path) -> PipelineSettings:
    """Read a flat config file into validated settings.

    Raises:
        ConfigurationError: If the file is missing, malformed or invalid
    """
    try:
        flat = read_key_values(path)
    except EventParseError as e:
        raise ConfigurationError(str(e)) from e
    return settings_from_mapping(nest(flat))


def dump_config_file(settings: PipelineSettings, path: Path) -> None:
    """Write every setting in the flat format :func:`load_config_file` reads."""
    write_key_values(path, flatten(settings.model_dump(mode="json")), header="jstr pipeline configuration")
