"""Mesh-to-mesh collision and proximity queries.

Thin layer over the kernel backends: every mesh gets a bounding-volume
hierarchy, and queries run pairwise over two hierarchies. Results are
symmetric in their arguments; intersection is boundary-inclusive, and
minimum distance is exactly zero whenever the meshes touch.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from . import _kernels
from ._kernels import BVH, build_bvh
from .mesh import TriMesh

BACKEND = _kernels.BACKEND


class MeshCollider:
    """A mesh prepared for repeated collision queries.

    Builds the BVH once; reuse the collider whenever the same mesh in the
    same pose is queried more than once.
    """

    __slots__ = ("mesh", "bvh")

    def __init__(self, mesh: TriMesh):
        if not isinstance(mesh, TriMesh):
            raise InvalidInput(f"expected a TriMesh, got {type(mesh).__name__}")
        if mesh.n_triangles == 0:
            raise InvalidInput("cannot collide an empty mesh")
        self.mesh = mesh
        self.bvh = build_bvh(mesh.triangle_coords())

    def intersects(self, other) -> bool:
        a, b = _ordered(self, _as_collider(other))
        return bool(_kernels.soup_intersects(a.bvh, b.bvh))

    def min_distance(self, other) -> float:
        a, b = _ordered(self, _as_collider(other))
        return float(_kernels.soup_min_distance(a.bvh, b.bvh))

    def __repr__(self) -> str:
        return f"MeshCollider({self.mesh!r})"


def _as_collider(obj) -> MeshCollider:
    if isinstance(obj, MeshCollider):
        return obj
    if isinstance(obj, TriMesh):
        return MeshCollider(obj)
    raise InvalidInput(f"expected a TriMesh or MeshCollider, got {type(obj).__name__}")


def _ordered(a: MeshCollider, b: MeshCollider):
    """Canonical argument order so queries are exactly symmetric.

    The kernels are symmetric up to floating-point evaluation order, so
    pin a deterministic order: more triangles first, ties broken by
    vertex count and then raw coordinate bytes.
    """
    ka = (a.mesh.n_triangles, a.mesh.n_vertices)
    kb = (b.mesh.n_triangles, b.mesh.n_vertices)
    if ka > kb:
        return a, b
    if kb > ka:
        return b, a
    if a.mesh.vertices.tobytes() >= b.mesh.vertices.tobytes():
        return a, b
    return b, a


def mesh_intersects(mesh_a: TriMesh, mesh_b: TriMesh) -> bool:
    """Boundary-inclusive intersection test between two meshes."""
    return MeshCollider(mesh_a).intersects(mesh_b)


def mesh_min_distance(mesh_a: TriMesh, mesh_b: TriMesh) -> float:
    """Exact minimum distance between two meshes; 0 when they touch."""
    return MeshCollider(mesh_a).min_distance(mesh_b)


def tri_tri_intersect(tri_a, tri_b) -> bool:
    """Boundary-inclusive test on two single triangles, shape (3, 3)."""
    return bool(_kernels.tri_tri_intersect(np.asarray(tri_a), np.asarray(tri_b)))


def tri_tri_distance(tri_a, tri_b) -> float:
    """Minimum distance between two single triangles, shape (3, 3)."""
    return float(_kernels.tri_tri_distance(np.asarray(tri_a), np.asarray(tri_b)))
