"""Template records: persistence, ranking colors, frame mapping, export."""

from .export import export_scene, scene_mesh
from .store import (
    AffordanceTemplate,
    TemplateSet,
    build_set,
    load,
    map_templates,
    normalize_and_color,
    save,
)

__all__ = [
    "AffordanceTemplate",
    "TemplateSet",
    "build_set",
    "export_scene",
    "load",
    "map_templates",
    "normalize_and_color",
    "save",
    "scene_mesh",
]
