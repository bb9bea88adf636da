"""Palm base-pose sampling on the target object's surface.

Candidate placements put the palm's contact face against the object:
a surface point is drawn area-uniformly from an allowed patch of
triangles, the palm frame is offset outward along the surface normal by
a standoff, its +Z axis is turned anti-parallel to that normal, and a
configurable number of discrete rolls about the normal enumerates
orientations. Everything is driven by one seed and fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput, InvalidRegion
from ..geometry.mesh import TriMesh
from ..geometry.pose import Pose


@dataclass(frozen=True)
class SamplingRegion:
    """Where and how palm placements may be sampled.

    ``patch`` is a collection of triangle indices on the target surface,
    or None for the whole surface. ``environment`` holds world-frame
    obstacle meshes (housing, fixtures) that the hand must not hit.
    """

    target: TriMesh
    patch: tuple[int, ...] | None = None
    standoff: float = 0.002
    spin: int = 1
    environment: tuple[TriMesh, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.target, TriMesh):
            raise InvalidInput("target must be a TriMesh")
        if self.standoff < 0:
            raise InvalidInput(f"standoff must be >= 0, got {self.standoff}")
        if self.spin < 1:
            raise InvalidInput(f"spin must be >= 1, got {self.spin}")
        object.__setattr__(self, "environment", tuple(self.environment))
        if self.patch is not None:
            patch = tuple(int(i) for i in self.patch)
            for i in patch:
                if not (0 <= i < self.target.n_triangles):
                    raise InvalidInput(f"patch index {i} out of range")
            object.__setattr__(self, "patch", patch)

    def patch_indices(self) -> np.ndarray:
        if self.patch is None:
            return np.arange(self.target.n_triangles)
        return np.array(self.patch, dtype=np.int64)


def sample_palm_poses(region: SamplingRegion, n: int, seed: int) -> list[Pose]:
    """Draw ``n`` deterministic palm base poses for one seed.

    Surface points are triangle barycenters drawn with probability
    proportional to triangle area; each drawn point contributes
    ``region.spin`` rolls about its normal before the next point is used,
    and the list is truncated to exactly ``n``.
    """
    if n < 1:
        raise InvalidInput(f"need n >= 1 samples, got {n}")
    target = region.target
    if not target.is_watertight:
        raise InvalidInput("target mesh must be watertight for surface sampling")
    patch = region.patch_indices()
    if len(patch) == 0:
        raise InvalidRegion("allowed patch contains no triangles")

    areas = target.triangle_areas()[patch]
    normals = target.triangle_normals()
    if target.volume() < 0:  # inward winding: flip to outward
        normals = -normals
    barycenters = target.triangle_barycenters()

    rng = np.random.default_rng(seed)
    n_points = math.ceil(n / region.spin)
    chosen = rng.choice(patch, size=n_points, replace=True, p=areas / areas.sum())

    poses: list[Pose] = []
    for tri_idx in chosen:
        point = barycenters[tri_idx]
        normal = normals[tri_idx]
        origin = point + region.standoff * normal
        base_rot = _face_rotation(normal)
        for k in range(region.spin):
            angle = 2.0 * math.pi * k / region.spin
            spin_rot = _axis_angle_matrix(normal, angle)
            poses.append(Pose.from_rotation(spin_rot @ base_rot, origin))
            if len(poses) == n:
                return poses
    return poses


def _face_rotation(normal: np.ndarray) -> np.ndarray:
    """Rotation whose +Z column is anti-parallel to ``normal``.

    The tangent direction is picked deterministically from the world x
    axis (or y when the normal is nearly parallel to x).
    """
    z = -normal
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(normal @ ref)) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    x = ref - (ref @ z) * z
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def _axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    c = math.cos(angle)
    s = math.sin(angle)
    ux, uy, uz = axis
    cross = np.array([[0.0, -uz, uy], [uz, 0.0, -ux], [-uy, ux, 0.0]])
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(axis, axis)
