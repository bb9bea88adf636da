# cython: language_level=3
"""Compiled collision kernels.

Same API and semantics as the pure-Python backend: boundary-inclusive
triangle-triangle intersection and exact soup-to-soup minimum distance
over the shared flat BVH. Kept in lockstep with that module; the test
suite cross-checks the two backends triangle by triangle.
"""

import numpy as np

from libc.math cimport fabs, sqrt, INFINITY

BACKEND_NAME = "compiled"

cdef double _REL_EPS = 1e-12
cdef int _STACK_CAP = 512


# --- scalar triangle-triangle intersection ----------------------------------

cdef inline double _min2(double a, double b) noexcept nogil:
    return a if a < b else b

cdef inline double _max2(double a, double b) noexcept nogil:
    return a if a > b else b

cdef inline double _clamp01(double x) noexcept nogil:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


cdef bint _interval_points(double pa, double pb, double pc,
                           double da, double db, double dc,
                           double* lo, double* hi) noexcept nogil:
    cdef double t0 = pa + (pb - pa) * da / (da - db)
    cdef double t1 = pa + (pc - pa) * da / (da - dc)
    if t0 <= t1:
        lo[0] = t0
        hi[0] = t1
    else:
        lo[0] = t1
        hi[0] = t0
    return True


cdef bint _interval(double p0, double p1, double p2,
                    double d0, double d1, double d2,
                    double* lo, double* hi) noexcept nogil:
    if d0 * d1 > 0.0:
        return _interval_points(p2, p0, p1, d2, d0, d1, lo, hi)
    if d0 * d2 > 0.0:
        return _interval_points(p1, p0, p2, d1, d0, d2, lo, hi)
    if d1 * d2 > 0.0 or d0 != 0.0:
        return _interval_points(p0, p1, p2, d0, d1, d2, lo, hi)
    if d1 != 0.0:
        return _interval_points(p1, p0, p2, d1, d0, d2, lo, hi)
    if d2 != 0.0:
        return _interval_points(p2, p0, p1, d2, d0, d1, lo, hi)
    return False  # all distances zero: coplanar


cdef inline double _orient2d(double ax, double ay, double bx, double by,
                             double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


cdef inline bint _on_seg_2d(double ax, double ay, double bx, double by,
                            double px, double py) noexcept nogil:
    return (_min2(ax, bx) <= px <= _max2(ax, bx)
            and _min2(ay, by) <= py <= _max2(ay, by))


cdef bint _seg_seg_2d(double p0x, double p0y, double p1x, double p1y,
                      double q0x, double q0y, double q1x, double q1y) noexcept nogil:
    cdef double d1 = _orient2d(q0x, q0y, q1x, q1y, p0x, p0y)
    cdef double d2 = _orient2d(q0x, q0y, q1x, q1y, p1x, p1y)
    cdef double d3 = _orient2d(p0x, p0y, p1x, p1y, q0x, q0y)
    cdef double d4 = _orient2d(p0x, p0y, p1x, p1y, q1x, q1y)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_seg_2d(q0x, q0y, q1x, q1y, p0x, p0y):
        return True
    if d2 == 0 and _on_seg_2d(q0x, q0y, q1x, q1y, p1x, p1y):
        return True
    if d3 == 0 and _on_seg_2d(p0x, p0y, p1x, p1y, q0x, q0y):
        return True
    if d4 == 0 and _on_seg_2d(p0x, p0y, p1x, p1y, q1x, q1y):
        return True
    return False


cdef bint _point_in_tri_2d(double px, double py, double ax, double ay,
                           double bx, double by, double cx, double cy) noexcept nogil:
    cdef double d1 = _orient2d(ax, ay, bx, by, px, py)
    cdef double d2 = _orient2d(bx, by, cx, cy, px, py)
    cdef double d3 = _orient2d(cx, cy, ax, ay, px, py)
    cdef bint has_neg = d1 < 0 or d2 < 0 or d3 < 0
    cdef bint has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)


cdef bint _coplanar_tri_tri(double nx, double ny, double nz,
                            const double* a, const double* b) noexcept nogil:
    cdef double anx = fabs(nx)
    cdef double any_ = fabs(ny)
    cdef double anz = fabs(nz)
    cdef int i0, i1, e0, e1, f0, f1
    cdef double p[6]
    cdef double q[6]
    if anx >= any_ and anx >= anz:
        i0 = 1
        i1 = 2
    elif any_ >= anz:
        i0 = 0
        i1 = 2
    else:
        i0 = 0
        i1 = 1
    for e0 in range(3):
        p[2 * e0] = a[3 * e0 + i0]
        p[2 * e0 + 1] = a[3 * e0 + i1]
        q[2 * e0] = b[3 * e0 + i0]
        q[2 * e0 + 1] = b[3 * e0 + i1]
    for e0 in range(3):
        e1 = (e0 + 1) % 3
        for f0 in range(3):
            f1 = (f0 + 1) % 3
            if _seg_seg_2d(p[2 * e0], p[2 * e0 + 1], p[2 * e1], p[2 * e1 + 1],
                           q[2 * f0], q[2 * f0 + 1], q[2 * f1], q[2 * f1 + 1]):
                return True
    if _point_in_tri_2d(p[0], p[1], q[0], q[1], q[2], q[3], q[4], q[5]):
        return True
    if _point_in_tri_2d(q[0], q[1], p[0], p[1], p[2], p[3], p[4], p[5]):
        return True
    return False


cdef bint _tri_tri_intersect_c(const double* a, const double* b) noexcept nogil:
    cdef double v0x = a[0], v0y = a[1], v0z = a[2]
    cdef double v1x = a[3], v1y = a[4], v1z = a[5]
    cdef double v2x = a[6], v2y = a[7], v2z = a[8]
    cdef double u0x = b[0], u0y = b[1], u0z = b[2]
    cdef double u1x = b[3], u1y = b[4], u1z = b[5]
    cdef double u2x = b[6], u2y = b[7], u2z = b[8]

    cdef double xmin = _min2(_min2(_min2(v0x, v1x), v2x), _min2(_min2(u0x, u1x), u2x))
    cdef double xmax = _max2(_max2(_max2(v0x, v1x), v2x), _max2(_max2(u0x, u1x), u2x))
    cdef double ymin = _min2(_min2(_min2(v0y, v1y), v2y), _min2(_min2(u0y, u1y), u2y))
    cdef double ymax = _max2(_max2(_max2(v0y, v1y), v2y), _max2(_max2(u0y, u1y), u2y))
    cdef double zmin = _min2(_min2(_min2(v0z, v1z), v2z), _min2(_min2(u0z, u1z), u2z))
    cdef double zmax = _max2(_max2(_max2(v0z, v1z), v2z), _max2(_max2(u0z, u1z), u2z))
    cdef double spread = _max2(_max2(xmax - xmin, ymax - ymin), zmax - zmin)

    cdef double e1x = u1x - u0x, e1y = u1y - u0y, e1z = u1z - u0z
    cdef double e2x = u2x - u0x, e2y = u2y - u0y, e2z = u2z - u0z
    cdef double n2x = e1y * e2z - e1z * e2y
    cdef double n2y = e1z * e2x - e1x * e2z
    cdef double n2z = e1x * e2y - e1y * e2x
    cdef double d2 = -(n2x * u0x + n2y * u0y + n2z * u0z)
    cdef double dv0 = n2x * v0x + n2y * v0y + n2z * v0z + d2
    cdef double dv1 = n2x * v1x + n2y * v1y + n2z * v1z + d2
    cdef double dv2 = n2x * v2x + n2y * v2y + n2z * v2z + d2
    cdef double eps = _REL_EPS * sqrt(n2x * n2x + n2y * n2y + n2z * n2z) * spread
    if fabs(dv0) <= eps:
        dv0 = 0.0
    if fabs(dv1) <= eps:
        dv1 = 0.0
    if fabs(dv2) <= eps:
        dv2 = 0.0
    if (dv0 > 0 and dv1 > 0 and dv2 > 0) or (dv0 < 0 and dv1 < 0 and dv2 < 0):
        return False

    cdef double f1x = v1x - v0x, f1y = v1y - v0y, f1z = v1z - v0z
    cdef double f2x = v2x - v0x, f2y = v2y - v0y, f2z = v2z - v0z
    cdef double n1x = f1y * f2z - f1z * f2y
    cdef double n1y = f1z * f2x - f1x * f2z
    cdef double n1z = f1x * f2y - f1y * f2x
    cdef double d1 = -(n1x * v0x + n1y * v0y + n1z * v0z)
    cdef double du0 = n1x * u0x + n1y * u0y + n1z * u0z + d1
    cdef double du1 = n1x * u1x + n1y * u1y + n1z * u1z + d1
    cdef double du2 = n1x * u2x + n1y * u2y + n1z * u2z + d1
    eps = _REL_EPS * sqrt(n1x * n1x + n1y * n1y + n1z * n1z) * spread
    if fabs(du0) <= eps:
        du0 = 0.0
    if fabs(du1) <= eps:
        du1 = 0.0
    if fabs(du2) <= eps:
        du2 = 0.0
    if (du0 > 0 and du1 > 0 and du2 > 0) or (du0 < 0 and du1 < 0 and du2 < 0):
        return False

    if dv0 == 0 and dv1 == 0 and dv2 == 0:
        return _coplanar_tri_tri(n2x, n2y, n2z, a, b)
    if du0 == 0 and du1 == 0 and du2 == 0:
        return _coplanar_tri_tri(n1x, n1y, n1z, a, b)

    cdef double dx = n1y * n2z - n1z * n2y
    cdef double dy = n1z * n2x - n1x * n2z
    cdef double dz = n1x * n2y - n1y * n2x
    cdef double adx = fabs(dx), ady = fabs(dy), adz = fabs(dz)
    cdef double pp0, pp1, pp2, qq0, qq1, qq2
    if adx >= ady and adx >= adz:
        pp0 = v0x; pp1 = v1x; pp2 = v2x
        qq0 = u0x; qq1 = u1x; qq2 = u2x
    elif ady >= adz:
        pp0 = v0y; pp1 = v1y; pp2 = v2y
        qq0 = u0y; qq1 = u1y; qq2 = u2y
    else:
        pp0 = v0z; pp1 = v1z; pp2 = v2z
        qq0 = u0z; qq1 = u1z; qq2 = u2z

    cdef double lo1 = 0.0, hi1 = 0.0, lo2 = 0.0, hi2 = 0.0
    if not _interval(pp0, pp1, pp2, dv0, dv1, dv2, &lo1, &hi1):
        return _coplanar_tri_tri(n2x, n2y, n2z, a, b)
    if not _interval(qq0, qq1, qq2, du0, du1, du2, &lo2, &hi2):
        return _coplanar_tri_tri(n2x, n2y, n2z, a, b)
    return _max2(lo1, lo2) <= _min2(hi1, hi2)


# --- scalar distance primitives ----------------------------------------------

cdef double _seg_seg_sq(double p1x, double p1y, double p1z,
                        double q1x, double q1y, double q1z,
                        double p2x, double p2y, double p2z,
                        double q2x, double q2y, double q2z) noexcept nogil:
    cdef double d1x = q1x - p1x, d1y = q1y - p1y, d1z = q1z - p1z
    cdef double d2x = q2x - p2x, d2y = q2y - p2y, d2z = q2z - p2z
    cdef double rx = p1x - p2x, ry = p1y - p2y, rz = p1z - p2z
    cdef double a = d1x * d1x + d1y * d1y + d1z * d1z
    cdef double e = d2x * d2x + d2y * d2y + d2z * d2z
    cdef double f = d2x * rx + d2y * ry + d2z * rz
    cdef double s, t, c, b, denom, cx, cy, cz
    if a <= 0.0 and e <= 0.0:
        return rx * rx + ry * ry + rz * rz
    if a <= 0.0:
        s = 0.0
        t = _clamp01(f / e)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= 0.0:
            t = 0.0
            s = _clamp01(-c / a)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom > 0.0:
                s = _clamp01((b * f - c * e) / denom)
            else:
                s = 0.0
            t = b * s + f
            if t < 0.0:
                t = 0.0
                s = _clamp01(-c / a)
            elif t > e:
                t = 1.0
                s = _clamp01((b - c) / a)
            else:
                t = t / e
    cx = p1x + d1x * s - (p2x + d2x * t)
    cy = p1y + d1y * s - (p2y + d2y * t)
    cz = p1z + d1z * s - (p2z + d2z * t)
    return cx * cx + cy * cy + cz * cz


cdef double _point_tri_sq(double px, double py, double pz,
                          double ax, double ay, double az,
                          double bx, double by, double bz,
                          double cx, double cy, double cz) noexcept nogil:
    cdef double abx = bx - ax, aby = by - ay, abz = bz - az
    cdef double acx = cx - ax, acy = cy - ay, acz = cz - az
    cdef double apx = px - ax, apy = py - ay, apz = pz - az
    cdef double d1 = abx * apx + aby * apy + abz * apz
    cdef double d2 = acx * apx + acy * apy + acz * apz
    cdef double bpx, bpy, bpz, d3, d4, vc, v, gx, gy, gz
    cdef double cpx, cpy, cpz, d5, d6, vb, w, va, denom
    if d1 <= 0.0 and d2 <= 0.0:
        return apx * apx + apy * apy + apz * apz
    bpx = px - bx; bpy = py - by; bpz = pz - bz
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
    cpx = px - cx; cpy = py - cy; cpz = pz - cz
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


cdef double _tri_tri_sq(const double* a, const double* b) noexcept nogil:
    cdef double best, d
    cdef int e0, e1, f0, f1, v0
    if _tri_tri_intersect_c(a, b):
        return 0.0
    best = INFINITY
    for e0 in range(3):
        e1 = (e0 + 1) % 3
        for f0 in range(3):
            f1 = (f0 + 1) % 3
            d = _seg_seg_sq(
                a[3 * e0], a[3 * e0 + 1], a[3 * e0 + 2],
                a[3 * e1], a[3 * e1 + 1], a[3 * e1 + 2],
                b[3 * f0], b[3 * f0 + 1], b[3 * f0 + 2],
                b[3 * f1], b[3 * f1 + 1], b[3 * f1 + 2])
            if d < best:
                best = d
    for v0 in range(3):
        d = _point_tri_sq(a[3 * v0], a[3 * v0 + 1], a[3 * v0 + 2],
                          b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], b[8])
        if d < best:
            best = d
        d = _point_tri_sq(b[3 * v0], b[3 * v0 + 1], b[3 * v0 + 2],
                          a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8])
        if d < best:
            best = d
    return best


# --- public triangle API -------------------------------------------------------


def tri_tri_intersect(tri_a, tri_b):
    """Boundary-inclusive intersection test on two (3, 3) triangles."""
    cdef double[::1] a = np.ascontiguousarray(tri_a, dtype=np.float64).reshape(9)
    cdef double[::1] b = np.ascontiguousarray(tri_b, dtype=np.float64).reshape(9)
    return bool(_tri_tri_intersect_c(&a[0], &b[0]))


def tri_tri_distance(tri_a, tri_b):
    """Minimum distance between two (3, 3) triangles; 0 when they touch."""
    cdef double[::1] a = np.ascontiguousarray(tri_a, dtype=np.float64).reshape(9)
    cdef double[::1] b = np.ascontiguousarray(tri_b, dtype=np.float64).reshape(9)
    return sqrt(_tri_tri_sq(&a[0], &b[0]))


# --- BVH pair traversal --------------------------------------------------------

cdef inline bint _boxes_overlap(const double* amin, const double* amax,
                                const double* bmin, const double* bmax) noexcept nogil:
    return (amin[0] <= bmax[0] and bmin[0] <= amax[0]
            and amin[1] <= bmax[1] and bmin[1] <= amax[1]
            and amin[2] <= bmax[2] and bmin[2] <= amax[2])


cdef inline double _box_sq_dist(const double* amin, const double* amax,
                                const double* bmin, const double* bmax) noexcept nogil:
    cdef double d = 0.0
    cdef double gap, g2
    cdef int k
    for k in range(3):
        gap = bmin[k] - amax[k]
        g2 = amin[k] - bmax[k]
        if g2 > gap:
            gap = g2
        if gap > 0.0:
            d += gap * gap
    return d


cdef inline double _node_extent(const double* lo, const double* hi) noexcept nogil:
    return (hi[0] - lo[0]) + (hi[1] - lo[1]) + (hi[2] - lo[2])


def soup_intersects(bvh_a, bvh_b):
    """True if any triangle of one soup touches any triangle of the other."""
    cdef double[:, :, ::1] tri_a = bvh_a.tri
    cdef double[:, ::1] pmin_a = bvh_a.prim_min
    cdef double[:, ::1] pmax_a = bvh_a.prim_max
    cdef double[:, ::1] nmin_a = bvh_a.bounds_min
    cdef double[:, ::1] nmax_a = bvh_a.bounds_max
    cdef int[::1] left_a = bvh_a.left
    cdef int[::1] right_a = bvh_a.right
    cdef int[::1] start_a = bvh_a.start
    cdef int[::1] count_a = bvh_a.count
    cdef int[::1] prim_a = bvh_a.prim
    cdef double[:, :, ::1] tri_b = bvh_b.tri
    cdef double[:, ::1] pmin_b = bvh_b.prim_min
    cdef double[:, ::1] pmax_b = bvh_b.prim_max
    cdef double[:, ::1] nmin_b = bvh_b.bounds_min
    cdef double[:, ::1] nmax_b = bvh_b.bounds_max
    cdef int[::1] left_b = bvh_b.left
    cdef int[::1] right_b = bvh_b.right
    cdef int[::1] start_b = bvh_b.start
    cdef int[::1] count_b = bvh_b.count
    cdef int[::1] prim_b = bvh_b.prim

    cdef int stack_a[512]
    cdef int stack_b[512]
    cdef int top = 0
    cdef int ia, ib, i, j, pa, pb
    cdef bint leaf_a, leaf_b
    cdef bint hit = False

    stack_a[0] = 0
    stack_b[0] = 0
    top = 1
    with nogil:
        while top > 0:
            top -= 1
            ia = stack_a[top]
            ib = stack_b[top]
            if not _boxes_overlap(&nmin_a[ia, 0], &nmax_a[ia, 0],
                                  &nmin_b[ib, 0], &nmax_b[ib, 0]):
                continue
            leaf_a = left_a[ia] < 0
            leaf_b = left_b[ib] < 0
            if leaf_a and leaf_b:
                for i in range(start_a[ia], start_a[ia] + count_a[ia]):
                    pa = prim_a[i]
                    for j in range(start_b[ib], start_b[ib] + count_b[ib]):
                        pb = prim_b[j]
                        if not _boxes_overlap(&pmin_a[pa, 0], &pmax_a[pa, 0],
                                              &pmin_b[pb, 0], &pmax_b[pb, 0]):
                            continue
                        if _tri_tri_intersect_c(&tri_a[pa, 0, 0], &tri_b[pb, 0, 0]):
                            hit = True
                            break
                    if hit:
                        break
                if hit:
                    break
            elif leaf_b or (not leaf_a and
                            _node_extent(&nmin_a[ia, 0], &nmax_a[ia, 0])
                            >= _node_extent(&nmin_b[ib, 0], &nmax_b[ib, 0])):
                if top + 2 > _STACK_CAP:
                    break  # rechecked outside nogil
                stack_a[top] = left_a[ia]; stack_b[top] = ib; top += 1
                stack_a[top] = right_a[ia]; stack_b[top] = ib; top += 1
            else:
                if top + 2 > _STACK_CAP:
                    break
                stack_a[top] = ia; stack_b[top] = left_b[ib]; top += 1
                stack_a[top] = ia; stack_b[top] = right_b[ib]; top += 1
    if not hit and top + 2 > _STACK_CAP:
        raise RuntimeError("BVH traversal stack overflow")
    return bool(hit)


def soup_min_distance(bvh_a, bvh_b):
    """Exact minimum distance between two triangle soups (0 if touching)."""
    cdef double[:, :, ::1] tri_a = bvh_a.tri
    cdef double[:, ::1] pmin_a = bvh_a.prim_min
    cdef double[:, ::1] pmax_a = bvh_a.prim_max
    cdef double[:, ::1] nmin_a = bvh_a.bounds_min
    cdef double[:, ::1] nmax_a = bvh_a.bounds_max
    cdef int[::1] left_a = bvh_a.left
    cdef int[::1] right_a = bvh_a.right
    cdef int[::1] start_a = bvh_a.start
    cdef int[::1] count_a = bvh_a.count
    cdef int[::1] prim_a = bvh_a.prim
    cdef double[:, :, ::1] tri_b = bvh_b.tri
    cdef double[:, ::1] pmin_b = bvh_b.prim_min
    cdef double[:, ::1] pmax_b = bvh_b.prim_max
    cdef double[:, ::1] nmin_b = bvh_b.bounds_min
    cdef double[:, ::1] nmax_b = bvh_b.bounds_max
    cdef int[::1] left_b = bvh_b.left
    cdef int[::1] right_b = bvh_b.right
    cdef int[::1] start_b = bvh_b.start
    cdef int[::1] count_b = bvh_b.count
    cdef int[::1] prim_b = bvh_b.prim

    cdef int stack_a[512]
    cdef int stack_b[512]
    cdef double stack_lb[512]
    cdef int top = 0
    cdef int ia, ib, i, j, pa, pb, l, r
    cdef bint leaf_a, leaf_b, overflow = False
    cdef double best = INFINITY
    cdef double lb, d, dl, dr

    stack_a[0] = 0
    stack_b[0] = 0
    stack_lb[0] = 0.0
    top = 1
    with nogil:
        while top > 0:
            top -= 1
            lb = stack_lb[top]
            ia = stack_a[top]
            ib = stack_b[top]
            if lb >= best:
                continue
            leaf_a = left_a[ia] < 0
            leaf_b = left_b[ib] < 0
            if leaf_a and leaf_b:
                for i in range(start_a[ia], start_a[ia] + count_a[ia]):
                    pa = prim_a[i]
                    for j in range(start_b[ib], start_b[ib] + count_b[ib]):
                        pb = prim_b[j]
                        if _box_sq_dist(&pmin_a[pa, 0], &pmax_a[pa, 0],
                                        &pmin_b[pb, 0], &pmax_b[pb, 0]) >= best:
                            continue
                        d = _tri_tri_sq(&tri_a[pa, 0, 0], &tri_b[pb, 0, 0])
                        if d < best:
                            best = d
                if best == 0.0:
                    break
            elif leaf_b or (not leaf_a and
                            _node_extent(&nmin_a[ia, 0], &nmax_a[ia, 0])
                            >= _node_extent(&nmin_b[ib, 0], &nmax_b[ib, 0])):
                if top + 2 > _STACK_CAP:
                    overflow = True
                    break
                l = left_a[ia]
                r = right_a[ia]
                dl = _box_sq_dist(&nmin_a[l, 0], &nmax_a[l, 0],
                                  &nmin_b[ib, 0], &nmax_b[ib, 0])
                dr = _box_sq_dist(&nmin_a[r, 0], &nmax_a[r, 0],
                                  &nmin_b[ib, 0], &nmax_b[ib, 0])
                if dl <= dr:
                    stack_lb[top] = dr; stack_a[top] = r; stack_b[top] = ib; top += 1
                    stack_lb[top] = dl; stack_a[top] = l; stack_b[top] = ib; top += 1
                else:
                    stack_lb[top] = dl; stack_a[top] = l; stack_b[top] = ib; top += 1
                    stack_lb[top] = dr; stack_a[top] = r; stack_b[top] = ib; top += 1
            else:
                if top + 2 > _STACK_CAP:
                    overflow = True
                    break
                l = left_b[ib]
                r = right_b[ib]
                dl = _box_sq_dist(&nmin_a[ia, 0], &nmax_a[ia, 0],
                                  &nmin_b[l, 0], &nmax_b[l, 0])
                dr = _box_sq_dist(&nmin_a[ia, 0], &nmax_a[ia, 0],
                                  &nmin_b[r, 0], &nmax_b[r, 0])
                if dl <= dr:
                    stack_lb[top] = dr; stack_a[top] = ia; stack_b[top] = r; top += 1
                    stack_lb[top] = dl; stack_a[top] = ia; stack_b[top] = l; top += 1
                else:
                    stack_lb[top] = dl; stack_a[top] = ia; stack_b[top] = l; top += 1
                    stack_lb[top] = dr; stack_a[top] = ia; stack_b[top] = r; top += 1
    if overflow:
        raise RuntimeError("BVH traversal stack overflow")
    return sqrt(best)
