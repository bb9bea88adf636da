"""Pure-Python collision kernels.

Fallback backend with the same API and semantics as the compiled one:
boundary-inclusive triangle-triangle intersection (separating-interval
test with a coplanar 2D fallback) and exact minimum distance between
triangle soups (edge-edge and vertex-face candidates under BVH pruning).
Scalar math runs on Python floats; the BVH arrays are converted to plain
lists once per tree and cached on it.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

# Relative slack used to snap near-zero plane distances; scaled by the
# magnitude of the quantities involved so behavior is size-invariant.
_REL_EPS = 1e-12


def _py(bvh):
    """Plain-list view of a BVH, cached on the tree."""
    cache = bvh._py_cache
    if cache is None:
        cache = (
            bvh.tri.reshape(len(bvh.tri), 9).tolist(),
            bvh.prim_min.tolist(),
            bvh.prim_max.tolist(),
            bvh.bounds_min.tolist(),
            bvh.bounds_max.tolist(),
            bvh.left.tolist(),
            bvh.right.tolist(),
            bvh.start.tolist(),
            bvh.count.tolist(),
            bvh.prim.tolist(),
        )
        bvh._py_cache = cache
    return cache


# --- scalar triangle-triangle intersection ---------------------------------


def _interval_points(pa, pb, pc, da, db, dc):
    # Vertex a sits alone on its side of the plane; edges a-b and a-c
    # cross it. Denominators are nonzero by construction of the caller.
    t0 = pa + (pb - pa) * da / (da - db)
    t1 = pa + (pc - pa) * da / (da - dc)
    return (t0, t1) if t0 <= t1 else (t1, t0)


def _interval(p0, p1, p2, d0, d1, d2):
    if d0 * d1 > 0.0:
        return _interval_points(p2, p0, p1, d2, d0, d1)
    if d0 * d2 > 0.0:
        return _interval_points(p1, p0, p2, d1, d0, d2)
    if d1 * d2 > 0.0 or d0 != 0.0:
        return _interval_points(p0, p1, p2, d0, d1, d2)
    if d1 != 0.0:
        return _interval_points(p1, p0, p2, d1, d0, d2)
    if d2 != 0.0:
        return _interval_points(p2, p0, p1, d2, d0, d1)
    return None  # all distances zero: coplanar


def _orient2d(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _seg_seg_2d(p0x, p0y, p1x, p1y, q0x, q0y, q1x, q1y):
    d1 = _orient2d(q0x, q0y, q1x, q1y, p0x, p0y)
    d2 = _orient2d(q0x, q0y, q1x, q1y, p1x, p1y)
    d3 = _orient2d(p0x, p0y, p1x, p1y, q0x, q0y)
    d4 = _orient2d(p0x, p0y, p1x, p1y, q1x, q1y)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True

    def on_seg(ax, ay, bx, by, px, py):
        return (
            min(ax, bx) <= px <= max(ax, bx)
            and min(ay, by) <= py <= max(ay, by)
        )

    if d1 == 0 and on_seg(q0x, q0y, q1x, q1y, p0x, p0y):
        return True
    if d2 == 0 and on_seg(q0x, q0y, q1x, q1y, p1x, p1y):
        return True
    if d3 == 0 and on_seg(p0x, p0y, p1x, p1y, q0x, q0y):
        return True
    if d4 == 0 and on_seg(p0x, p0y, p1x, p1y, q1x, q1y):
        return True
    return False


def _point_in_tri_2d(px, py, ax, ay, bx, by, cx, cy):
    d1 = _orient2d(ax, ay, bx, by, px, py)
    d2 = _orient2d(bx, by, cx, cy, px, py)
    d3 = _orient2d(cx, cy, ax, ay, px, py)
    has_neg = d1 < 0 or d2 < 0 or d3 < 0
    has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)


def _coplanar_tri_tri(nx, ny, nz, a, b):
    # Project both triangles onto the plane axis-pair where the shared
    # normal is largest, then run inclusive 2D tests.
    anx, any_, anz = abs(nx), abs(ny), abs(nz)
    if anx >= any_ and anx >= anz:
        i0, i1 = 1, 2
    elif any_ >= anz:
        i0, i1 = 0, 2
    else:
        i0, i1 = 0, 1
    p = (a[i0], a[i1], a[3 + i0], a[3 + i1], a[6 + i0], a[6 + i1])
    q = (b[i0], b[i1], b[3 + i0], b[3 + i1], b[6 + i0], b[6 + i1])
    for e0 in range(3):
        e1 = (e0 + 1) % 3
        for f0 in range(3):
            f1 = (f0 + 1) % 3
            if _seg_seg_2d(
                p[2 * e0], p[2 * e0 + 1], p[2 * e1], p[2 * e1 + 1],
                q[2 * f0], q[2 * f0 + 1], q[2 * f1], q[2 * f1 + 1],
            ):
                return True
    if _point_in_tri_2d(p[0], p[1], q[0], q[1], q[2], q[3], q[4], q[5]):
        return True
    if _point_in_tri_2d(q[0], q[1], p[0], p[1], p[2], p[3], p[4], p[5]):
        return True
    return False


def _tri_tri_intersect_flat(a, b):
    """Boundary-inclusive intersection of two triangles given as 9 floats."""
    v0x, v0y, v0z, v1x, v1y, v1z, v2x, v2y, v2z = a
    u0x, u0y, u0z, u1x, u1y, u1z, u2x, u2y, u2z = b

    # Spread of the six vertices, for scale-invariant zero snapping.
    xs = (v0x, v1x, v2x, u0x, u1x, u2x)
    ys = (v0y, v1y, v2y, u0y, u1y, u2y)
    zs = (v0z, v1z, v2z, u0z, u1z, u2z)
    spread = max(
        max(xs) - min(xs), max(ys) - min(ys), max(zs) - min(zs)
    )

    # Plane of triangle b.
    e1x, e1y, e1z = u1x - u0x, u1y - u0y, u1z - u0z
    e2x, e2y, e2z = u2x - u0x, u2y - u0y, u2z - u0z
    n2x = e1y * e2z - e1z * e2y
    n2y = e1z * e2x - e1x * e2z
    n2z = e1x * e2y - e1y * e2x
    d2 = -(n2x * u0x + n2y * u0y + n2z * u0z)
    dv0 = n2x * v0x + n2y * v0y + n2z * v0z + d2
    dv1 = n2x * v1x + n2y * v1y + n2z * v1z + d2
    dv2 = n2x * v2x + n2y * v2y + n2z * v2z + d2
    n2len = math.sqrt(n2x * n2x + n2y * n2y + n2z * n2z)
    eps = _REL_EPS * n2len * spread
    if abs(dv0) <= eps:
        dv0 = 0.0
    if abs(dv1) <= eps:
        dv1 = 0.0
    if abs(dv2) <= eps:
        dv2 = 0.0
    if (dv0 > 0 and dv1 > 0 and dv2 > 0) or (dv0 < 0 and dv1 < 0 and dv2 < 0):
        return False

    # Plane of triangle a.
    f1x, f1y, f1z = v1x - v0x, v1y - v0y, v1z - v0z
    f2x, f2y, f2z = v2x - v0x, v2y - v0y, v2z - v0z
    n1x = f1y * f2z - f1z * f2y
    n1y = f1z * f2x - f1x * f2z
    n1z = f1x * f2y - f1y * f2x
    d1 = -(n1x * v0x + n1y * v0y + n1z * v0z)
    du0 = n1x * u0x + n1y * u0y + n1z * u0z + d1
    du1 = n1x * u1x + n1y * u1y + n1z * u1z + d1
    du2 = n1x * u2x + n1y * u2y + n1z * u2z + d1
    n1len = math.sqrt(n1x * n1x + n1y * n1y + n1z * n1z)
    eps = _REL_EPS * n1len * spread
    if abs(du0) <= eps:
        du0 = 0.0
    if abs(du1) <= eps:
        du1 = 0.0
    if abs(du2) <= eps:
        du2 = 0.0
    if (du0 > 0 and du1 > 0 and du2 > 0) or (du0 < 0 and du1 < 0 and du2 < 0):
        return False

    if dv0 == 0 and dv1 == 0 and dv2 == 0:
        return _coplanar_tri_tri(n2x, n2y, n2z, a, b)
    if du0 == 0 and du1 == 0 and du2 == 0:
        return _coplanar_tri_tri(n1x, n1y, n1z, a, b)

    # Direction of the plane-plane intersection line; project onto its
    # dominant axis.
    dx = n1y * n2z - n1z * n2y
    dy = n1z * n2x - n1x * n2z
    dz = n1x * n2y - n1y * n2x
    adx, ady, adz = abs(dx), abs(dy), abs(dz)
    if adx >= ady and adx >= adz:
        pp0, pp1, pp2 = v0x, v1x, v2x
        qq0, qq1, qq2 = u0x, u1x, u2x
    elif ady >= adz:
        pp0, pp1, pp2 = v0y, v1y, v2y
        qq0, qq1, qq2 = u0y, u1y, u2y
    else:
        pp0, pp1, pp2 = v0z, v1z, v2z
        qq0, qq1, qq2 = u0z, u1z, u2z

    i1 = _interval(pp0, pp1, pp2, dv0, dv1, dv2)
    i2 = _interval(qq0, qq1, qq2, du0, du1, du2)
    if i1 is None or i2 is None:
        return _coplanar_tri_tri(n2x, n2y, n2z, a, b)
    lo = i1[0] if i1[0] > i2[0] else i2[0]
    hi = i1[1] if i1[1] < i2[1] else i2[1]
    return lo <= hi


# --- scalar distance primitives ---------------------------------------------


def _seg_seg_sq(p1x, p1y, p1z, q1x, q1y, q1z, p2x, p2y, p2z, q2x, q2y, q2z):
    """Squared distance between segments p1-q1 and p2-q2."""
    d1x, d1y, d1z = q1x - p1x, q1y - p1y, q1z - p1z
    d2x, d2y, d2z = q2x - p2x, q2y - p2y, q2z - p2z
    rx, ry, rz = p1x - p2x, p1y - p2y, p1z - p2z
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    if a <= 0.0 and e <= 0.0:
        return rx * rx + ry * ry + rz * rz
    if a <= 0.0:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= 0.0:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom > 0.0:
                s = min(max((b * f - c * e) / denom, 0.0), 1.0)
            else:
                s = 0.0
            t = b * s + f
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > e:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
            else:
                t = t / e
    cx = p1x + d1x * s - (p2x + d2x * t)
    cy = p1y + d1y * s - (p2y + d2y * t)
    cz = p1z + d1z * s - (p2z + d2z * t)
    return cx * cx + cy * cy + cz * cz


def _point_tri_sq(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz):
    """Squared distance from a point to a triangle."""
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return apx * apx + apy * apy + apz * apz
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return bpx * bpx + bpy * bpy + bpz * bpz
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        gx = apx - abx * v
        gy = apy - aby * v
        gz = apz - abz * v
        return gx * gx + gy * gy + gz * gz
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return cpx * cpx + cpy * cpy + cpz * cpz
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        gx = apx - acx * w
        gy = apy - acy * w
        gz = apz - acz * w
        return gx * gx + gy * gy + gz * gz
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        gx = px - (bx + (cx - bx) * w)
        gy = py - (by + (cy - by) * w)
        gz = pz - (bz + (cz - bz) * w)
        return gx * gx + gy * gy + gz * gz
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    gx = px - (ax + abx * v + acx * w)
    gy = py - (ay + aby * v + acy * w)
    gz = pz - (az + abz * v + acz * w)
    return gx * gx + gy * gy + gz * gz


def _tri_tri_sq(a, b):
    """Squared distance between two triangles given as 9 floats each."""
    if _tri_tri_intersect_flat(a, b):
        return 0.0
    best = math.inf
    for e0 in (0, 3, 6):
        e1 = (e0 + 3) % 9
        for f0 in (0, 3, 6):
            f1 = (f0 + 3) % 9
            d = _seg_seg_sq(
                a[e0], a[e0 + 1], a[e0 + 2], a[e1], a[e1 + 1], a[e1 + 2],
                b[f0], b[f0 + 1], b[f0 + 2], b[f1], b[f1 + 1], b[f1 + 2],
            )
            if d < best:
                best = d
    for v0 in (0, 3, 6):
        d = _point_tri_sq(
            a[v0], a[v0 + 1], a[v0 + 2],
            b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], b[8],
        )
        if d < best:
            best = d
        d = _point_tri_sq(
            b[v0], b[v0 + 1], b[v0 + 2],
            a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8],
        )
        if d < best:
            best = d
    return best


# --- public triangle API -----------------------------------------------------


def tri_tri_intersect(tri_a, tri_b) -> bool:
    """Boundary-inclusive intersection test on two (3, 3) triangles."""
    a = np.asarray(tri_a, dtype=np.float64).reshape(9).tolist()
    b = np.asarray(tri_b, dtype=np.float64).reshape(9).tolist()
    return _tri_tri_intersect_flat(a, b)


def tri_tri_distance(tri_a, tri_b) -> float:
    """Minimum distance between two (3, 3) triangles; 0 when they touch."""
    a = np.asarray(tri_a, dtype=np.float64).reshape(9).tolist()
    b = np.asarray(tri_b, dtype=np.float64).reshape(9).tolist()
    return math.sqrt(_tri_tri_sq(a, b))


# --- BVH pair traversal ------------------------------------------------------


def _boxes_overlap(amin, amax, bmin, bmax):
    return (
        amin[0] <= bmax[0] and bmin[0] <= amax[0]
        and amin[1] <= bmax[1] and bmin[1] <= amax[1]
        and amin[2] <= bmax[2] and bmin[2] <= amax[2]
    )


def _box_sq_dist(amin, amax, bmin, bmax):
    d = 0.0
    for k in range(3):
        gap = bmin[k] - amax[k]
        g2 = amin[k] - bmax[k]
        if g2 > gap:
            gap = g2
        if gap > 0.0:
            d += gap * gap
    return d


def soup_intersects(bvh_a, bvh_b) -> bool:
    """True if any triangle of one soup touches any triangle of the other."""
    tri_a, pmin_a, pmax_a, nmin_a, nmax_a, left_a, right_a, start_a, count_a, prim_a = _py(bvh_a)
    tri_b, pmin_b, pmax_b, nmin_b, nmax_b, left_b, right_b, start_b, count_b, prim_b = _py(bvh_b)
    stack = [(0, 0)]
    while stack:
        ia, ib = stack.pop()
        if not _boxes_overlap(nmin_a[ia], nmax_a[ia], nmin_b[ib], nmax_b[ib]):
            continue
        leaf_a = left_a[ia] < 0
        leaf_b = left_b[ib] < 0
        if leaf_a and leaf_b:
            for i in range(start_a[ia], start_a[ia] + count_a[ia]):
                pa = prim_a[i]
                ta = tri_a[pa]
                la, ha = pmin_a[pa], pmax_a[pa]
                for j in range(start_b[ib], start_b[ib] + count_b[ib]):
                    pb = prim_b[j]
                    if not _boxes_overlap(la, ha, pmin_b[pb], pmax_b[pb]):
                        continue
                    if _tri_tri_intersect_flat(ta, tri_b[pb]):
                        return True
        elif leaf_b or (not leaf_a and _node_extent(nmin_a[ia], nmax_a[ia])
                        >= _node_extent(nmin_b[ib], nmax_b[ib])):
            stack.append((left_a[ia], ib))
            stack.append((right_a[ia], ib))
        else:
            stack.append((ia, left_b[ib]))
            stack.append((ia, right_b[ib]))
    return False


def _node_extent(lo, hi):
    return (hi[0] - lo[0]) + (hi[1] - lo[1]) + (hi[2] - lo[2])


def soup_min_distance(bvh_a, bvh_b) -> float:
    """Exact minimum distance between two triangle soups (0 if touching)."""
    tri_a, pmin_a, pmax_a, nmin_a, nmax_a, left_a, right_a, start_a, count_a, prim_a = _py(bvh_a)
    tri_b, pmin_b, pmax_b, nmin_b, nmax_b, left_b, right_b, start_b, count_b, prim_b = _py(bvh_b)
    best = math.inf
    stack = [(0.0, 0, 0)]
    while stack:
        lb, ia, ib = stack.pop()
        if lb >= best:
            continue
        leaf_a = left_a[ia] < 0
        leaf_b = left_b[ib] < 0
        if leaf_a and leaf_b:
            for i in range(start_a[ia], start_a[ia] + count_a[ia]):
                pa = prim_a[i]
                ta = tri_a[pa]
                la, ha = pmin_a[pa], pmax_a[pa]
                for j in range(start_b[ib], start_b[ib] + count_b[ib]):
                    pb = prim_b[j]
                    if _box_sq_dist(la, ha, pmin_b[pb], pmax_b[pb]) >= best:
                        continue
                    d = _tri_tri_sq(ta, tri_b[pb])
                    if d < best:
                        best = d
                        if best == 0.0:
                            return 0.0
        elif leaf_b or (not leaf_a and _node_extent(nmin_a[ia], nmax_a[ia])
                        >= _node_extent(nmin_b[ib], nmax_b[ib])):
            l, r = left_a[ia], right_a[ia]
            dl = _box_sq_dist(nmin_a[l], nmax_a[l], nmin_b[ib], nmax_b[ib])
            dr = _box_sq_dist(nmin_a[r], nmax_a[r], nmin_b[ib], nmax_b[ib])
            # push the farther pair first so the nearer is explored first
            if dl <= dr:
                stack.append((dr, r, ib))
                stack.append((dl, l, ib))
            else:
                stack.append((dl, l, ib))
                stack.append((dr, r, ib))
        else:
            l, r = left_b[ib], right_b[ib]
            dl = _box_sq_dist(nmin_a[ia], nmax_a[ia], nmin_b[l], nmax_b[l])
            dr = _box_sq_dist(nmin_a[ia], nmax_a[ia], nmin_b[r], nmax_b[r])
            if dl <= dr:
                stack.append((dr, ia, r))
                stack.append((dl, ia, l))
            else:
                stack.append((dl, ia, l))
                stack.append((dr, ia, r))
    return math.sqrt(best)
