"""Geometry core: poses, triangle meshes, convex hulls, collision queries."""

from .collision import (
    BACKEND,
    MeshCollider,
    mesh_intersects,
    mesh_min_distance,
    tri_tri_distance,
    tri_tri_intersect,
)
from .hull import ConvexHull, convex_hull, hull_quality
from .mesh import TriMesh
from .meshio import load_mesh, load_obj, load_ply, load_stl, save_ply, save_stl
from .pose import Pose, apply_map, frame_map

__all__ = [
    "BACKEND",
    "ConvexHull",
    "MeshCollider",
    "Pose",
    "TriMesh",
    "apply_map",
    "convex_hull",
    "frame_map",
    "hull_quality",
    "load_mesh",
    "load_obj",
    "load_ply",
    "load_stl",
    "mesh_intersects",
    "mesh_min_distance",
    "save_ply",
    "save_stl",
    "tri_tri_distance",
    "tri_tri_intersect",
]
