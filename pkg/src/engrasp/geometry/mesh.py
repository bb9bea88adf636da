"""Indexed triangle meshes carrying object and hand-link geometry.

Vertices are in meters, Z-up. Meshes are immutable after construction;
watertightness is recorded but not required (grasp synthesis checks the
flag itself where it needs a closed target surface).
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import InvalidInput, InvalidMesh
from .pose import Pose

DEGENERATE_AREA = 1e-12  # m^2


class TriMesh:
    """Triangle mesh with optional per-vertex RGB colors in [0, 1]."""

    __slots__ = ("vertices", "triangles", "colors", "_watertight", "_hash")

    def __init__(self, vertices, triangles, colors=None):
        v = np.ascontiguousarray(vertices, dtype=np.float64)
        f = np.ascontiguousarray(triangles, dtype=np.int32)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidMesh(f"vertices must be (N, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise InvalidMesh(f"triangles must be (M, 3), got {f.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidMesh("vertex coordinates must be finite")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise InvalidMesh(
                f"triangle indices out of range [0, {len(v)}): "
                f"min {f.min()}, max {f.max()}"
            )
        if f.size:
            a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
            areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
            bad = np.nonzero(areas <= DEGENERATE_AREA)[0]
            if bad.size:
                raise InvalidMesh(
                    f"triangle {bad[0]} is degenerate (area {areas[bad[0]]:.3e} m^2)"
                )
        if colors is not None:
            colors = np.ascontiguousarray(colors, dtype=np.float64)
            if colors.shape != (len(v), 3):
                raise InvalidMesh(
                    f"colors must be ({len(v)}, 3), got {colors.shape}"
                )
            if colors.size and (colors.min() < 0.0 or colors.max() > 1.0):
                raise InvalidMesh("vertex colors must lie in [0, 1]")
            colors.setflags(write=False)
        v.setflags(write=False)
        f.setflags(write=False)
        self.vertices = v
        self.triangles = f
        self.colors = colors
        self._watertight = None
        self._hash = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def is_watertight(self) -> bool:
        """True when every edge is shared by exactly two opposed triangles."""
        if self._watertight is None:
            self._watertight = self._check_watertight()
        return self._watertight

    def _check_watertight(self) -> bool:
        f = self.triangles
        if len(f) == 0:
            return False
        edges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        # Directed edges must be unique and each must have its reverse present.
        keys = edges[:, 0].astype(np.int64) * len(self.vertices) + edges[:, 1]
        if len(np.unique(keys)) != len(keys):
            return False
        rev = edges[:, 1].astype(np.int64) * len(self.vertices) + edges[:, 0]
        return bool(np.all(np.isin(keys, rev)))

    def triangle_normals(self) -> np.ndarray:
        """Unit normals following the winding order (outward for closed meshes)."""
        v, f = self.vertices, self.triangles
        n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def triangle_areas(self) -> np.ndarray:
        v, f = self.vertices, self.triangles
        return 0.5 * np.linalg.norm(
            np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]]), axis=1
        )

    def triangle_barycenters(self) -> np.ndarray:
        v, f = self.vertices, self.triangles
        return (v[f[:, 0]] + v[f[:, 1]] + v[f[:, 2]]) / 3.0

    def triangle_coords(self) -> np.ndarray:
        """Triangle corner coordinates as an (M, 3, 3) array."""
        return self.vertices[self.triangles]

    def volume(self) -> float:
        """Signed enclosed volume via tetrahedra against the origin."""
        a, b, c = np.rollaxis(self.triangle_coords(), 1)
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def volume_centroid(self) -> np.ndarray:
        """Center of mass assuming uniform density; needs a closed mesh."""
        if not self.is_watertight:
            raise InvalidInput("volume centroid requires a watertight mesh")
        a, b, c = np.rollaxis(self.triangle_coords(), 1)
        signed = np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0
        total = signed.sum()
        if abs(total) < 1e-15:
            raise InvalidInput("mesh encloses no volume")
        centers = (a + b + c) / 4.0  # tetrahedron centroid with apex at origin
        return (signed[:, None] * centers).sum(axis=0) / total

    def vertex_centroid(self) -> np.ndarray:
        """Arithmetic mean of the vertices (the link-center convention)."""
        if self.n_vertices == 0:
            raise InvalidInput("empty mesh has no vertex centroid")
        return self.vertices.mean(axis=0)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n_vertices == 0:
            raise InvalidInput("empty mesh has no bounding box")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def transformed(self, pose: Pose) -> "TriMesh":
        return TriMesh(pose.apply(self.vertices), self.triangles, self.colors)

    def with_colors(self, colors) -> "TriMesh":
        return TriMesh(self.vertices, self.triangles, colors)

    def content_hash(self) -> str:
        """SHA-256 over the geometry, independent of the source file format."""
        if self._hash is None:
            h = hashlib.sha256()
            h.update(b"engrasp-mesh/1")
            h.update(np.int64(self.n_vertices).tobytes())
            h.update(np.int64(self.n_triangles).tobytes())
            h.update(self.vertices.tobytes())
            h.update(self.triangles.tobytes())
            self._hash = h.hexdigest()
        return self._hash

    def __repr__(self) -> str:
        return f"TriMesh({self.n_vertices} vertices, {self.n_triangles} triangles)"
