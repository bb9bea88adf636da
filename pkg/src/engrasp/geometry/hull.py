"""Convex hulls of contact-point sets and the hull-based grasp quality metric.

A grasp is treated as caging when the object's center of mass lies inside
the convex hull of the contact-link centers. Quality is the distance from
the centroid of the hull's vertices to that center of mass: smaller means
the contact cage is more evenly balanced around the object.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull as _QhullConvexHull
from scipy.spatial import QhullError

from ..errors import InvalidInput

# Default containment slack, scaled by the hull's bounding-box diagonal.
CONTAINS_RTOL = 1e-9


class ConvexHull:
    """Convex hull of a 3D point set.

    Wraps Qhull output in the two queries the grasp pipeline needs:
    point containment against the facet half-spaces and the centroid of
    the hull vertices. Degenerate inputs (fewer than 4 points, or all
    points coplanar/collinear/coincident) produce a hull with
    ``is_degenerate`` set; such hulls contain nothing and have no
    vertex centroid.
    """

    __slots__ = ("points", "vertex_indices", "normals", "offsets", "is_degenerate")

    def __init__(self, points):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise InvalidInput(f"expected (N, 3) points, got {points.shape}")
        if len(points) == 0:
            raise InvalidInput("cannot build a hull from zero points")
        if not np.all(np.isfinite(points)):
            raise InvalidInput("hull points must be finite")
        self.points = points.copy()
        self.points.setflags(write=False)
        if len(points) < 4 or _affine_dim(points) < 3:
            self.is_degenerate = True
            self.vertex_indices = None
            self.normals = None
            self.offsets = None
            return
        try:
            qh = _QhullConvexHull(points)
        except QhullError:
            # Numerically flat sets can slip past the rank check.
            self.is_degenerate = True
            self.vertex_indices = None
            self.normals = None
            self.offsets = None
            return
        self.is_degenerate = False
        self.vertex_indices = np.sort(qh.vertices.astype(np.int64))
        self.vertex_indices.setflags(write=False)
        # Qhull equations are [normal | offset] with normal.x + offset <= 0
        # inside; store as normal.x <= offset.
        self.normals = qh.equations[:, :3].copy()
        self.offsets = -qh.equations[:, 3].copy()
        self.normals.setflags(write=False)
        self.offsets.setflags(write=False)

    @property
    def vertices(self) -> np.ndarray:
        """Hull vertex coordinates, a subset of the input points."""
        if self.is_degenerate:
            raise InvalidInput("degenerate hull has no vertices")
        return self.points[self.vertex_indices]

    def contains(self, point, tol=None) -> bool:
        """True if ``point`` lies inside or on the hull boundary.

        ``tol`` is an absolute slack on each facet plane; by default it is
        ``CONTAINS_RTOL`` times the hull bounding-box diagonal, so the test
        is scale-invariant. Degenerate hulls contain nothing.
        """
        if self.is_degenerate:
            return False
        point = np.asarray(point, dtype=np.float64)
        if point.shape != (3,):
            raise InvalidInput(f"expected a 3-vector, got shape {point.shape}")
        if tol is None:
            span = self.points.max(axis=0) - self.points.min(axis=0)
            tol = CONTAINS_RTOL * float(np.linalg.norm(span))
        return bool(np.all(self.normals @ point <= self.offsets + tol))

    def vertex_centroid(self) -> np.ndarray:
        """Arithmetic mean of the hull vertices (not the volume centroid)."""
        if self.is_degenerate:
            raise InvalidInput("degenerate hull has no vertex centroid")
        return self.vertices.mean(axis=0)

    def volume(self) -> float:
        if self.is_degenerate:
            return 0.0
        return float(_QhullConvexHull(self.points).volume)

    def __repr__(self) -> str:
        if self.is_degenerate:
            return f"ConvexHull({len(self.points)} points, degenerate)"
        return (
            f"ConvexHull({len(self.points)} points, "
            f"{len(self.vertex_indices)} vertices)"
        )


def _affine_dim(points: np.ndarray) -> int:
    """Dimension of the affine span, via singular values of centered points."""
    centered = points - points.mean(axis=0)
    if len(points) == 1:
        return 0
    s = np.linalg.svd(centered, compute_uv=False)
    scale = s[0] if s[0] > 0 else 1.0
    return int(np.sum(s > 1e-12 * max(scale, 1.0)))


def convex_hull(points) -> ConvexHull:
    return ConvexHull(points)


def hull_quality(hull: ConvexHull, center_of_mass) -> float:
    """Distance from the hull vertex centroid to the center of mass.

    Zero is best: the cage of contacts is balanced exactly around the
    object's center of mass. Raises on degenerate hulls, which cannot
    cage anything.
    """
    g = np.asarray(center_of_mass, dtype=np.float64)
    if g.shape != (3,):
        raise InvalidInput(f"expected a 3-vector, got shape {g.shape}")
    return float(np.linalg.norm(hull.vertex_centroid() - g))
