"""Collision kernel backend selection.

Prefers the compiled extension and falls back to the pure-Python
implementation when it is unavailable. Setting the environment variable
``ENGRASP_PURE_PYTHON`` to a truthy value forces the fallback, which is
useful for debugging and for benchmarking the two backends against each
other. ``BACKEND`` names the backend actually in use.
"""

import os

from .bvh import BVH, LEAF_SIZE, build_bvh, single_leaf_bvh

__all__ = [
    "BVH",
    "LEAF_SIZE",
    "build_bvh",
    "single_leaf_bvh",
    "BACKEND",
    "tri_tri_intersect",
    "tri_tri_distance",
    "soup_intersects",
    "soup_min_distance",
]


def _force_pure() -> bool:
    value = os.environ.get("ENGRASP_PURE_PYTHON", "")
    return value.strip().lower() not in ("", "0", "false", "no")


if _force_pure():
    from . import _pycore as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pycore as _impl

BACKEND: str = _impl.BACKEND_NAME
tri_tri_intersect = _impl.tri_tri_intersect
tri_tri_distance = _impl.tri_tri_distance
soup_intersects = _impl.soup_intersects
soup_min_distance = _impl.soup_min_distance
