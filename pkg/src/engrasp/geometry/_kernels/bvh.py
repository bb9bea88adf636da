"""Flat bounding-volume hierarchy over triangle soups.

Built once per mesh pose and consumed by both collision backends. Median
split on the longest centroid axis gives a balanced, deterministic tree.
Nodes live in parallel arrays so the compiled backend can traverse them
as plain memoryviews.
"""

from __future__ import annotations

import numpy as np

from ...errors import InvalidInput

LEAF_SIZE = 4


class BVH:
    """Bounding-volume hierarchy plus the triangle data it indexes.

    ``left[i] < 0`` marks node ``i`` as a leaf holding primitives
    ``prim[start[i]:start[i] + count[i]]``. Node 0 is the root.
    """

    __slots__ = (
        "tri",
        "prim_min",
        "prim_max",
        "bounds_min",
        "bounds_max",
        "left",
        "right",
        "start",
        "count",
        "prim",
        "_py_cache",
    )

    def __init__(self, tri, prim_min, prim_max, bounds_min, bounds_max,
                 left, right, start, count, prim):
        self.tri = tri
        self.prim_min = prim_min
        self.prim_max = prim_max
        self.bounds_min = bounds_min
        self.bounds_max = bounds_max
        self.left = left
        self.right = right
        self.start = start
        self.count = count
        self.prim = prim
        self._py_cache = None

    @property
    def n_triangles(self) -> int:
        return len(self.tri)

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    def __repr__(self) -> str:
        return f"BVH({self.n_triangles} triangles, {self.n_nodes} nodes)"


def build_bvh(tri_coords, leaf_size: int = LEAF_SIZE) -> BVH:
    """Build a BVH over triangles given as an (M, 3, 3) coordinate array."""
    tri = np.ascontiguousarray(tri_coords, dtype=np.float64)
    if tri.ndim != 3 or tri.shape[1:] != (3, 3):
        raise InvalidInput(f"expected (M, 3, 3) triangle coordinates, got {tri.shape}")
    m = len(tri)
    if m == 0:
        raise InvalidInput("cannot build a BVH over zero triangles")
    if leaf_size < 1:
        raise InvalidInput("leaf_size must be at least 1")
    prim_min = tri.min(axis=1)
    prim_max = tri.max(axis=1)
    centroids = tri.mean(axis=1)
    prim = np.arange(m, dtype=np.int32)

    bmin: list[np.ndarray] = []
    bmax: list[np.ndarray] = []
    left: list[int] = []
    right: list[int] = []
    start: list[int] = []
    count: list[int] = []

    # Recursion depth is O(log M) thanks to the median split.
    def _build(lo: int, hi: int) -> int:
        idx = len(left)
        seg = prim[lo:hi]
        bmin.append(prim_min[seg].min(axis=0))
        bmax.append(prim_max[seg].max(axis=0))
        left.append(-1)
        right.append(-1)
        start.append(lo)
        count.append(hi - lo)
        if hi - lo <= leaf_size:
            return idx
        c = centroids[seg]
        extent = c.max(axis=0) - c.min(axis=0)
        axis = int(np.argmax(extent))
        if extent[axis] <= 0.0:
            return idx  # all centroids coincide, keep as leaf
        order = np.argsort(c[:, axis], kind="stable")
        prim[lo:hi] = seg[order]
        mid = (lo + hi) // 2
        left[idx] = _build(lo, mid)
        right[idx] = _build(mid, hi)
        count[idx] = 0
        return idx

    _build(0, m)
    return BVH(
        tri=tri,
        prim_min=np.ascontiguousarray(prim_min),
        prim_max=np.ascontiguousarray(prim_max),
        bounds_min=np.ascontiguousarray(np.array(bmin)),
        bounds_max=np.ascontiguousarray(np.array(bmax)),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        start=np.array(start, dtype=np.int32),
        count=np.array(count, dtype=np.int32),
        prim=prim,
    )


_LEAF_I32 = {}


def single_leaf_bvh(tri_coords) -> BVH:
    """One-node BVH over a small soup; cheaper than a full build.

    Exists for hot loops that re-pose a handful of triangles every
    iteration (finger links during closing): query semantics are
    identical to :func:`build_bvh`, only the tree is flat.
    """
    tri = np.ascontiguousarray(tri_coords, dtype=np.float64)
    m = len(tri)
    if m == 0:
        raise InvalidInput("cannot build a BVH over zero triangles")
    prim_min = tri.min(axis=1)
    prim_max = tri.max(axis=1)
    ints = _LEAF_I32.get(m)
    if ints is None:
        ints = (
            np.array([-1], dtype=np.int32),
            np.array([-1], dtype=np.int32),
            np.array([0], dtype=np.int32),
            np.array([m], dtype=np.int32),
            np.arange(m, dtype=np.int32),
        )
        _LEAF_I32[m] = ints
    left, right, start, count, prim = ints
    return BVH(
        tri=tri,
        prim_min=prim_min,
        prim_max=prim_max,
        bounds_min=np.ascontiguousarray(prim_min.min(axis=0)[None, :]),
        bounds_max=np.ascontiguousarray(prim_max.max(axis=0)[None, :]),
        left=left,
        right=right,
        start=start,
        count=count,
        prim=prim,
    )
