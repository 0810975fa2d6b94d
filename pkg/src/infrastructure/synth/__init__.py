"""Synthetic scenes with exact ground truth."""

from .generator import BackgroundSpec, ObjectSpec, SceneSpec, SourceMap, SynthOutput, generate
from .scene_file import dump_scene_file, load_scene_file, scene_from_mapping, scene_to_mapping
from .suite import StandardSuiteCatalog, standard_suite

__all__ = [
    "BackgroundSpec",
    "ObjectSpec",
    "SceneSpec",
    "SourceMap",
    "StandardSuiteCatalog",
    "SynthOutput",
    "dump_scene_file",
    "generate",
    "load_scene_file",
    "scene_from_mapping",
    "scene_to_mapping",
    "standard_suite",
]
