"""Collision kernels against brute-force oracles, plus backend parity.

The oracle for minimum distance is an O(n^2) scan over all triangle
pairs using a straightforward closest-point formulation written here
from scratch, so a kernel bug cannot hide behind shared code.
"""

import itertools
import math
import subprocess
import sys

import numpy as np
import pytest

from engrasp.fixtures import box_mesh
from engrasp.geometry import _kernels
from engrasp.geometry._kernels import _pycore, build_bvh, single_leaf_bvh
from engrasp.geometry.collision import (
    BACKEND,
    MeshCollider,
    mesh_intersects,
    mesh_min_distance,
    tri_tri_distance,
    tri_tri_intersect,
)
from engrasp.geometry.pose import Pose


# ---------------------------------------------------------------- oracle

def _seg_seg_dist(p1, q1, p2, q2):
    # Closest distance between segments, textbook clamped-parameter form.
    d1, d2 = q1 - p1, q2 - p2
    r = p1 - p2
    a, e, f = d1 @ d1, d2 @ d2, d2 @ r
    if a <= 1e-30 and e <= 1e-30:
        return np.linalg.norm(r)
    if a <= 1e-30:
        t = np.clip(f / e, 0.0, 1.0)
        return np.linalg.norm(p1 - (p2 + t * d2))
    c = d1 @ r
    if e <= 1e-30:
        s = np.clip(-c / a, 0.0, 1.0)
        return np.linalg.norm(p1 + s * d1 - p2)
    b = d1 @ d2
    denom = a * e - b * b
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-30 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
    elif t > 1.0:
        t, s = 1.0, np.clip((b - c) / a, 0.0, 1.0)
    return np.linalg.norm(p1 + s * d1 - (p2 + t * d2))


def _point_tri_dist(p, a, b, c):
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return np.linalg.norm(p - a)
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return np.linalg.norm(p - b)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        v = d1 / (d1 - d3)
        return np.linalg.norm(p - (a + v * ab))
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return np.linalg.norm(p - c)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        w = d2 / (d2 - d6)
        return np.linalg.norm(p - (a + w * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return np.linalg.norm(p - (b + w * (c - b)))
    denom = 1.0 / (va + vb + vc)
    v, w = vb * denom, vc * denom
    return np.linalg.norm(p - (a + ab * v + ac * w))


def _seg_pierces_tri(p, q, a, b, c):
    # Moller-Trumbore restricted to the segment parameter range.
    d = q - p
    e1, e2 = b - a, c - a
    h = np.cross(d, e2)
    det = e1 @ h
    if abs(det) < 1e-14:
        return False
    inv = 1.0 / det
    s = p - a
    u = (s @ h) * inv
    if u < 0.0 or u > 1.0:
        return False
    qv = np.cross(s, e1)
    v = (d @ qv) * inv
    if v < 0.0 or u + v > 1.0:
        return False
    t = (e2 @ qv) * inv
    return 0.0 <= t <= 1.0


def oracle_tri_tri_dist(t1, t2):
    # vertex-triangle and edge-edge pairs cover every disjoint
    # configuration; piercing (an edge through the other's interior)
    # must be caught separately, where the true distance is zero
    edges1 = [(t1[0], t1[1]), (t1[1], t1[2]), (t1[2], t1[0])]
    edges2 = [(t2[0], t2[1]), (t2[1], t2[2]), (t2[2], t2[0])]
    for p, q in edges1:
        if _seg_pierces_tri(p, q, *t2):
            return 0.0
    for p, q in edges2:
        if _seg_pierces_tri(p, q, *t1):
            return 0.0
    best = math.inf
    for (p1, q1), (p2, q2) in itertools.product(edges1, edges2):
        best = min(best, _seg_seg_dist(p1, q1, p2, q2))
    for p in t1:
        best = min(best, _point_tri_dist(p, *t2))
    for p in t2:
        best = min(best, _point_tri_dist(p, *t1))
    return best


def oracle_soup_dist(tris_a, tris_b):
    return min(oracle_tri_tri_dist(ta, tb)
               for ta in tris_a for tb in tris_b)


def random_tri(rng, scale=1.0, offset=(0.0, 0.0, 0.0)):
    while True:
        t = rng.uniform(-scale, scale, size=(3, 3)) + np.asarray(offset)
        if np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0])) > 1e-6:
            return t


# ------------------------------------------------------------ primitives

class TestTriTriIntersect:
    def test_clear_cases(self):
        a = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        b = np.array([[0.25, 0.25, -0.5], [0.25, 0.25, 0.5], [0.6, 0.6, 0.0]])
        c = np.array([[0.0, 0, 1], [1, 0, 1], [0, 1, 1]])
        assert tri_tri_intersect(a, b)
        assert not tri_tri_intersect(a, c)

    def test_touching_counts_as_intersecting(self):
        a = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        # shares exactly one point with a's interior edge
        b = np.array([[0.5, 0.0, 0.0], [0.5, -1.0, 1.0], [0.5, -1.0, -1.0]])
        assert tri_tri_intersect(a, b)

    def test_coplanar_overlap_and_separation(self):
        a = np.array([[0.0, 0, 0], [2, 0, 0], [0, 2, 0]])
        b = np.array([[0.5, 0.5, 0], [1.5, 0.5, 0], [0.5, 1.5, 0]])
        c = np.array([[5.0, 5, 0], [6, 5, 0], [5, 6, 0]])
        assert tri_tri_intersect(a, b)
        assert not tri_tri_intersect(a, c)

    def test_agrees_with_distance_zero(self):
        # intersecting iff oracle distance is zero (within fp slack)
        rng = np.random.default_rng(21)
        for _ in range(400):
            t1 = random_tri(rng)
            t2 = random_tri(rng)
            hit = tri_tri_intersect(t1, t2)
            d = oracle_tri_tri_dist(t1, t2)
            if d > 1e-9:
                assert not hit
            elif d == 0.0:
                assert hit


class TestTriTriDistance:
    def test_matches_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(400):
            t1 = random_tri(rng)
            t2 = random_tri(rng, offset=rng.uniform(-2, 2, size=3))
            got = tri_tri_distance(t1, t2)
            want = oracle_tri_tri_dist(t1, t2)
            assert got == pytest.approx(want, abs=1e-10)

    def test_zero_on_intersection(self):
        a = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        b = np.array([[0.25, 0.25, -0.5], [0.25, 0.25, 0.5], [0.6, 0.6, 0.0]])
        assert tri_tri_distance(a, b) == 0.0

    def test_parallel_planes(self):
        a = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        b = a + np.array([0.0, 0.0, 0.25])
        assert tri_tri_distance(a, b) == pytest.approx(0.25, abs=1e-12)


# -------------------------------------------------------------- BVH soup

class TestBVH:
    def test_build_and_shape(self):
        m = box_mesh(1.0)
        bvh = build_bvh(m.triangle_coords())
        assert bvh.n_triangles == 12
        assert bvh.n_nodes >= 1

    def test_single_leaf(self):
        m = box_mesh(1.0)
        bvh = single_leaf_bvh(m.triangle_coords())
        assert bvh.n_nodes == 1
        assert bvh.n_triangles == 12

    def test_bvh_vs_exhaustive_distance(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            tris_a = np.array([random_tri(rng, 0.5) for _ in range(12)])
            tris_b = np.array([random_tri(rng, 0.5,
                                          offset=rng.uniform(1.5, 3.0, size=3))
                               for _ in range(12)])
            got = _kernels.soup_min_distance(build_bvh(tris_a),
                                             build_bvh(tris_b))
            want = oracle_soup_dist(tris_a, tris_b)
            assert got == pytest.approx(want, abs=1e-10)

    def test_bvh_vs_exhaustive_intersection(self):
        rng = np.random.default_rng(24)
        hits = 0
        for _ in range(60):
            off = rng.uniform(-1.0, 1.0, size=3)
            tris_a = np.array([random_tri(rng, 0.6) for _ in range(10)])
            tris_b = np.array([random_tri(rng, 0.6, offset=off)
                               for _ in range(10)])
            want = any(tri_tri_intersect(ta, tb)
                       for ta in tris_a for tb in tris_b)
            got = _kernels.soup_intersects(build_bvh(tris_a),
                                           build_bvh(tris_b))
            assert got == want
            hits += int(want)
        assert 0 < hits < 60  # both outcomes exercised

    def test_leaf_layout_does_not_change_answers(self):
        rng = np.random.default_rng(25)
        tris_a = np.array([random_tri(rng, 0.5) for _ in range(20)])
        tris_b = np.array([random_tri(rng, 0.5, offset=(2.0, 0.1, -0.3))
                           for _ in range(20)])
        d_tree = _kernels.soup_min_distance(build_bvh(tris_a),
                                            build_bvh(tris_b))
        d_flat = _kernels.soup_min_distance(single_leaf_bvh(tris_a),
                                            single_leaf_bvh(tris_b))
        assert d_tree == pytest.approx(d_flat, abs=1e-12)


# ------------------------------------------------------------- mesh API

class TestMeshCollider:
    def test_separated_boxes(self):
        a = box_mesh(1.0, center=(0.0, 0.0, 0.0))
        b = box_mesh(1.0, center=(3.0, 0.0, 0.0))
        assert not mesh_intersects(a, b)
        assert mesh_min_distance(a, b) == pytest.approx(2.0, abs=1e-12)

    def test_overlapping_boxes(self):
        a = box_mesh(1.0, center=(0.0, 0.0, 0.0))
        b = box_mesh(1.0, center=(0.5, 0.0, 0.0))
        assert mesh_intersects(a, b)
        assert mesh_min_distance(a, b) == 0.0

    def test_touching_faces(self):
        a = box_mesh(1.0, center=(0.0, 0.0, 0.0))
        b = box_mesh(1.0, center=(1.0, 0.0, 0.0))
        assert mesh_intersects(a, b)  # shared face: boundary inclusive
        assert mesh_min_distance(a, b) == 0.0

    def test_fully_contained_box_reports_no_surface_hit(self):
        # surface soups of nested boxes do not touch; distance is the gap
        outer = box_mesh(2.0, center=(0.0, 0.0, 0.0))
        inner = box_mesh(0.5, center=(0.0, 0.0, 0.0))
        assert not mesh_intersects(outer, inner)
        assert mesh_min_distance(outer, inner) == pytest.approx(0.75, abs=1e-12)

    def test_collider_reuse_matches_one_shot(self):
        a = box_mesh(1.0, center=(0.0, 0.0, 0.0))
        b = box_mesh(1.0, center=(1.7, 0.2, 0.1))
        ca, cb = MeshCollider(a), MeshCollider(b)
        assert ca.min_distance(cb) == pytest.approx(mesh_min_distance(a, b),
                                                    abs=1e-15)
        assert ca.intersects(cb) == mesh_intersects(a, b)

    def test_argument_order_irrelevant(self):
        rng = np.random.default_rng(26)
        for _ in range(20):
            pose = Pose.from_axis_angle(rng.normal(size=3) + 1e-3,
                                        rng.uniform(-2, 2),
                                        rng.uniform(-2, 2, size=3))
            a = box_mesh(1.0)
            b = box_mesh(0.7).transformed(pose)
            assert (mesh_min_distance(a, b)
                    == pytest.approx(mesh_min_distance(b, a), abs=1e-15))
            assert mesh_intersects(a, b) == mesh_intersects(b, a)

    def test_rotated_oracle_distance(self):
        rng = np.random.default_rng(27)
        for _ in range(15):
            pose = Pose.from_axis_angle(rng.normal(size=3) + 1e-3,
                                        rng.uniform(-2.0, 2.0),
                                        rng.uniform(2.0, 3.0, size=3))
            a = box_mesh(1.0)
            b = box_mesh(0.8).transformed(pose)
            want = oracle_soup_dist(a.triangle_coords(), b.triangle_coords())
            assert mesh_min_distance(a, b) == pytest.approx(want, abs=1e-10)


# --------------------------------------------------------- backend parity

class TestBackends:
    def test_a_compiled_backend_is_active(self):
        # the build must have produced the extension in this environment
        assert BACKEND == "compiled"

    def test_pure_python_matches_active_backend(self):
        rng = np.random.default_rng(28)
        for _ in range(150):
            t1 = random_tri(rng)
            t2 = random_tri(rng, offset=rng.uniform(-1.5, 1.5, size=3))
            assert (_kernels.tri_tri_intersect(t1, t2)
                    == _pycore.tri_tri_intersect(t1, t2))
            assert _kernels.tri_tri_distance(t1, t2) == pytest.approx(
                _pycore.tri_tri_distance(t1, t2), abs=1e-12)

    def test_soup_parity(self):
        rng = np.random.default_rng(29)
        tris_a = np.array([random_tri(rng, 0.5) for _ in range(15)])
        tris_b = np.array([random_tri(rng, 0.5, offset=(1.2, 0.0, 0.2))
                           for _ in range(15)])
        ba, bb = build_bvh(tris_a), build_bvh(tris_b)
        assert _kernels.soup_min_distance(ba, bb) == pytest.approx(
            _pycore.soup_min_distance(ba, bb), abs=1e-12)
        assert (_kernels.soup_intersects(ba, bb)
                == _pycore.soup_intersects(ba, bb))

    def test_env_var_forces_fallback(self):
        code = (
            "from engrasp.geometry.collision import BACKEND; print(BACKEND)")
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True, check=True,
            env={"PATH": "/usr/bin:/bin", "ENGRASP_PURE_PYTHON": "1"},
        )
        assert out.stdout.strip() == "python"
