"""Extraction-moment model for off-center grasps.

Pulling an off-center cage out of a mating slot twists the part: the
extraction force acts about the grasp center with the hull-centering
offset as its lever arm. The magnitude reported here is that torque,
exactly linear in both the offset and the force.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput, InvalidTemplate
from ..templates.store import AffordanceTemplate

DEFAULT_FORCE_MAGNITUDE = 10.0  # newtons


def moment_about(c, g, force) -> float:
    """Torque magnitude of ``force`` applied at ``c`` about ``g``."""
    c = np.asarray(c, dtype=np.float64).reshape(3)
    g = np.asarray(g, dtype=np.float64).reshape(3)
    force = np.asarray(force, dtype=np.float64).reshape(3)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(g))
            and np.all(np.isfinite(force))):
        raise InvalidInput("moment inputs must be finite")
    return float(np.linalg.norm(np.cross(c - g, force)))


def extraction_moment(template: AffordanceTemplate, g, force) -> float:
    """Lever-arm moment of an extraction force about the grasp center.

    The application point is the centroid of the template's hull
    vertices, so a perfectly centered grasp (d_h = 0) yields zero moment
    for any force.
    """
    if template.hull_vertices.shape[0] == 0:
        raise InvalidTemplate(f"template {template.id}: no hull vertices")
    c = template.hull_vertices.mean(axis=0)
    return moment_about(c, g, force)


def default_force(object_mesh) -> np.ndarray:
    """Extraction force along the object's longest bounding-box axis.

    A mating slot constrains the part most tightly along its longest
    dimension, so that axis is the default pull direction.
    """
    lo, hi = object_mesh.aabb()
    axis = int(np.argmax(hi - lo))
    force = np.zeros(3)
    force[axis] = DEFAULT_FORCE_MAGNITUDE
    return force
