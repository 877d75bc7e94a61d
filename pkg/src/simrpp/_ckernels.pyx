# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the routines in ``_pykernels``.

Signatures and semantics match the pure-Python module one for one.
"""
import numpy as np

from libc.math cimport sqrt, INFINITY, NAN, isinf, fmin, fmax
from libc.stdlib cimport malloc, free, qsort

cdef double DISC_EPS = 1e-12
cdef double CONST_EPS = 1e-24

cdef struct Iv:
    double b0
    double b1


cdef int _cmp_iv(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<Iv*>pa).b0
    cdef double b = (<Iv*>pb).b0
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


cdef inline bint _quad_neg(double a, double b, double c, double* r0, double* r1) noexcept nogil:
    cdef double disc, sq, q, t
    if a <= CONST_EPS:
        if c < 0.0:
            r0[0] = -INFINITY
            r1[0] = INFINITY
            return True
        return False
    disc = b * b - 4.0 * a * c
    if disc <= DISC_EPS:
        return False
    sq = sqrt(disc)
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r0[0] = q / a
    r1[0] = c / q
    if r0[0] > r1[0]:
        t = r0[0]
        r0[0] = r1[0]
        r1[0] = t
    return True


cdef inline double _seg_point_dist2(double ax, double ay, double bx, double by, double px, double py) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    cdef double u, ex, ey
    if l2 <= 0.0:
        ex = px - ax
        ey = py - ay
        return ex * ex + ey * ey
    u = ((px - ax) * dx + (py - ay) * dy) / l2
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    ex = ax + u * dx - px
    ey = ay + u * dy - py
    return ex * ex + ey * ey


cdef inline double _point_rect_dist2(double px, double py, double x0, double y0, double x1, double y1) noexcept nogil:
    cdef double dx = 0.0, dy = 0.0
    if px < x0:
        dx = x0 - px
    elif px > x1:
        dx = px - x1
    if py < y0:
        dy = y0 - py
    elif py > y1:
        dy = py - y1
    return dx * dx + dy * dy


cdef inline bint _clip(double p, double q, double* u0, double* u1) noexcept nogil:
    cdef double u
    if p == 0.0:
        return q >= 0.0
    u = q / p
    if p < 0.0:
        if u > u1[0]:
            return False
        if u > u0[0]:
            u0[0] = u
    else:
        if u < u0[0]:
            return False
        if u < u1[0]:
            u1[0] = u
    return True


cdef inline bint _seg_hits_rect(double ax, double ay, double bx, double by,
                                double x0, double y0, double x1, double y1) noexcept nogil:
    cdef double u0 = 0.0, u1 = 1.0
    cdef double dx = bx - ax, dy = by - ay
    if not _clip(-dx, ax - x0, &u0, &u1):
        return False
    if not _clip(dx, x1 - ax, &u0, &u1):
        return False
    if not _clip(-dy, ay - y0, &u0, &u1):
        return False
    if not _clip(dy, y1 - ay, &u0, &u1):
        return False
    return True


cdef inline double _seg_rect_dist2(double ax, double ay, double bx, double by,
                                   double x0, double y0, double x1, double y1) noexcept nogil:
    cdef double d
    if _seg_hits_rect(ax, ay, bx, by, x0, y0, x1, y1):
        return 0.0
    d = _point_rect_dist2(ax, ay, x0, y0, x1, y1)
    d = fmin(d, _point_rect_dist2(bx, by, x0, y0, x1, y1))
    d = fmin(d, _seg_point_dist2(ax, ay, bx, by, x0, y0))
    d = fmin(d, _seg_point_dist2(ax, ay, bx, by, x1, y0))
    d = fmin(d, _seg_point_dist2(ax, ay, bx, by, x0, y1))
    d = fmin(d, _seg_point_dist2(ax, ay, bx, by, x1, y1))
    return d


cdef bint _point_free(double x, double y, double r, const double[:, ::1] circles,
                      const double[:, ::1] rects, double width, double height) noexcept nogil:
    cdef Py_ssize_t k
    cdef double rr, ex, ey
    if x - r < 0.0 or x + r > width or y - r < 0.0 or y + r > height:
        return False
    for k in range(circles.shape[0]):
        rr = r + circles[k, 2]
        ex = x - circles[k, 0]
        ey = y - circles[k, 1]
        if ex * ex + ey * ey <= rr * rr:
            return False
    for k in range(rects.shape[0]):
        if _point_rect_dist2(x, y, rects[k, 0], rects[k, 1], rects[k, 2], rects[k, 3]) <= r * r:
            return False
    return True


cdef bint _sweep_free(double ax, double ay, double bx, double by, double r,
                      const double[:, ::1] circles, const double[:, ::1] rects,
                      double width, double height) noexcept nogil:
    cdef Py_ssize_t k
    cdef double rr, cx, cy
    cdef double mnx = fmin(ax, bx), mxx = fmax(ax, bx)
    cdef double mny = fmin(ay, by), mxy = fmax(ay, by)
    if mnx < r or mxx > width - r or mny < r or mxy > height - r:
        return False
    for k in range(circles.shape[0]):
        cx = circles[k, 0]
        cy = circles[k, 1]
        rr = r + circles[k, 2]
        if cx + rr < mnx or cx - rr > mxx or cy + rr < mny or cy - rr > mxy:
            continue
        if _seg_point_dist2(ax, ay, bx, by, cx, cy) <= rr * rr:
            return False
    for k in range(rects.shape[0]):
        if rects[k, 2] + r < mnx or rects[k, 0] - r > mxx or rects[k, 3] + r < mny or rects[k, 1] - r > mxy:
            continue
        if _seg_rect_dist2(ax, ay, bx, by, rects[k, 0], rects[k, 1], rects[k, 2], rects[k, 3]) <= r * r:
            return False
    return True


def point_static_free(double x, double y, double r, const double[:, ::1] circles,
                      const double[:, ::1] rects, double width, double height):
    return bool(_point_free(x, y, r, circles, rects, width, height))


def sweep_static_free(double ax, double ay, double bx, double by, double r,
                      const double[:, ::1] circles, const double[:, ::1] rects,
                      double width, double height):
    return bool(_sweep_free(ax, ay, bx, by, r, circles, rects, width, height))


def sweep_static_free_many(double ax, double ay, const double[:, ::1] pts, double r,
                           const double[:, ::1] circles, const double[:, ::1] rects,
                           double width, double height):
    cdef Py_ssize_t k, n = pts.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    for k in range(n):
        o[k] = _sweep_free(ax, ay, pts[k, 0], pts[k, 1], r, circles, rects, width, height)
    return out


cdef inline void _velocity(double x0, double y0, double x1, double y1, double t0, double t1,
                           double* vx, double* vy) noexcept nogil:
    cdef double dt = t1 - t0
    if dt <= 0.0 or isinf(dt):
        vx[0] = 0.0
        vy[0] = 0.0
    else:
        vx[0] = (x1 - x0) / dt
        vy[0] = (y1 - y0) / dt


cdef bint _pair(const double[::1] a, const double[::1] b, double* out0, double* out1) noexcept nogil:
    cdef double lo = fmax(a[4], b[4])
    cdef double hi = fmin(a[5], b[5])
    cdef double avx, avy, bvx, bvy, dx, dy, wx, wy, rr, r0, r1, s0, s1
    if not hi > lo:
        return False
    _velocity(a[0], a[1], a[2], a[3], a[4], a[5], &avx, &avy)
    _velocity(b[0], b[1], b[2], b[3], b[4], b[5], &bvx, &bvy)
    dx = (a[0] + avx * (lo - a[4])) - (b[0] + bvx * (lo - b[4]))
    dy = (a[1] + avy * (lo - a[4])) - (b[1] + bvy * (lo - b[4]))
    wx = avx - bvx
    wy = avy - bvy
    rr = a[6] + b[6]
    if not _quad_neg(wx * wx + wy * wy, 2.0 * (dx * wx + dy * wy), dx * dx + dy * dy - rr * rr, &r0, &r1):
        return False
    s0 = fmax(r0, 0.0)
    s1 = fmin(r1, hi - lo)
    if not s1 > s0:
        return False
    out0[0] = lo + s0
    out1[0] = lo + s1
    return True


def pair_interval(const double[::1] a, const double[::1] b):
    cdef double t0, t1
    if _pair(a, b, &t0, &t1):
        return (t0, t1)
    return None


def trajectory_pair_intervals(const double[:, ::1] segs_a, const double[:, ::1] segs_b):
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = segs_a.shape[0], nb = segs_b.shape[0]
    cdef double t0, t1
    out = []
    while i < na and j < nb:
        if _pair(segs_a[i], segs_b[j], &t0, &t1):
            out.append((t0, t1))
        if segs_a[i, 5] <= segs_b[j, 5]:
            i += 1
        else:
            j += 1
    return out


cdef bint _stationary(double x, double y, double r, const double[::1] s,
                      double* out0, double* out1) noexcept nogil:
    cdef double x0 = s[0], y0 = s[1], x1 = s[2], y1 = s[3], t0 = s[4], t1 = s[5]
    cdef double span = t1 - t0
    cdef double rr = r + s[6]
    cdef double dx, dy, vx, vy, r0, r1, s0, s1
    if not span > 0.0:
        return False
    dx = x - x0
    dy = y - y0
    if x0 == x1 and y0 == y1:
        if dx * dx + dy * dy < rr * rr:
            out0[0] = t0
            out1[0] = t1
            return True
        return False
    if fmin(x0, x1) - rr > x or fmax(x0, x1) + rr < x or fmin(y0, y1) - rr > y or fmax(y0, y1) + rr < y:
        return False
    vx = (x1 - x0) / span
    vy = (y1 - y0) / span
    if not _quad_neg(vx * vx + vy * vy, -2.0 * (dx * vx + dy * vy), dx * dx + dy * dy - rr * rr, &r0, &r1):
        return False
    s0 = fmax(r0, 0.0)
    s1 = fmin(r1, span)
    if not s1 > s0:
        return False
    out0[0] = t0 + s0
    out1[0] = t0 + s1
    return True


def stationary_intervals(double x, double y, double r, const double[:, ::1] segs):
    cdef Py_ssize_t k
    cdef double t0, t1
    out = []
    for k in range(segs.shape[0]):
        if _stationary(x, y, r, segs[k], &t0, &t1):
            out.append((t0, t1))
    return out


cdef bint _blocked_stationary(double ax, double ay, double ux, double uy, double T,
                              double ox, double oy, double s0, double s1, double rr,
                              double* b0, double* b1) noexcept nogil:
    cdef double dx = ax - ox, dy = ay - oy, r0, r1, e0, e1
    if not _quad_neg(ux * ux + uy * uy, 2.0 * (dx * ux + dy * uy), dx * dx + dy * dy - rr * rr, &r0, &r1):
        return False
    e0 = fmax(r0, 0.0)
    e1 = fmin(r1, T)
    if not e1 > e0:
        return False
    b0[0] = s0 - e1
    b1[0] = s1 - e0
    return True


cdef inline void _take(double tau, double* lo, double* hi) noexcept nogil:
    if tau < lo[0]:
        lo[0] = tau
    if tau > hi[0]:
        hi[0] = tau


cdef bint _blocked_moving(double ax, double ay, double ux, double uy, double T,
                          double ox, double oy, double wx, double wy, double s0, double L,
                          double rr, double* b0, double* b1) noexcept nogil:
    cdef double cx = ax - ox, cy = ay - oy
    cdef double px = ux - wx, py = uy - wy
    cdef double qx = -ux, qy = -uy
    cdef double r2 = rr * rr
    cdef double lo = INFINITY, hi = -INFINITY
    cdef double vt[4]
    cdef double vtau[4]
    cdef double edt[4]
    cdef double edtau[4]
    cdef double ex, ey, d0x, d0y, d1x, d1y, r0, r1, tau, lam
    cdef double pp, pc, pq, cpx, cpy, qpx, qpy, aa, ts
    cdef int k, m
    vt[0] = 0.0; vtau[0] = 0.0
    vt[1] = 0.0; vtau[1] = -T
    vt[2] = L; vtau[2] = L
    vt[3] = L; vtau[3] = L - T
    for k in range(4):
        ex = cx + px * vt[k] + qx * vtau[k]
        ey = cy + py * vt[k] + qy * vtau[k]
        if ex * ex + ey * ey < r2:
            _take(vtau[k], &lo, &hi)
    # edges start at vertices 1, 3, 0, 1 with the directions below
    vt[0] = 0.0; vtau[0] = -T; edt[0] = 0.0; edtau[0] = T
    vt[1] = L; vtau[1] = L - T; edt[1] = 0.0; edtau[1] = T
    vt[2] = 0.0; vtau[2] = 0.0; edt[2] = L; edtau[2] = L
    vt[3] = 0.0; vtau[3] = -T; edt[3] = L; edtau[3] = L
    for k in range(4):
        d0x = cx + px * vt[k] + qx * vtau[k]
        d0y = cy + py * vt[k] + qy * vtau[k]
        d1x = px * edt[k] + qx * edtau[k]
        d1y = py * edt[k] + qy * edtau[k]
        if not _quad_neg(d1x * d1x + d1y * d1y, 2.0 * (d0x * d1x + d0y * d1y), d0x * d0x + d0y * d0y - r2, &r0, &r1):
            continue
        if isinf(r0):
            continue
        for m in range(2):
            lam = r0 if m == 0 else r1
            if 0.0 <= lam <= 1.0:
                _take(vtau[k] + edtau[k] * lam, &lo, &hi)
    pp = px * px + py * py
    if pp > CONST_EPS:
        pc = px * cx + py * cy
        pq = px * qx + py * qy
        cpx = cx - px * pc / pp
        cpy = cy - py * pc / pp
        qpx = qx - px * pq / pp
        qpy = qy - py * pq / pp
        aa = qpx * qpx + qpy * qpy
        if aa > CONST_EPS:
            if _quad_neg(aa, 2.0 * (cpx * qpx + cpy * qpy), cpx * cpx + cpy * cpy - r2, &r0, &r1):
                for m in range(2):
                    tau = r0 if m == 0 else r1
                    ts = -(pc + pq * tau) / pp
                    if -1e-12 <= ts <= L + 1e-12 and ts - T - 1e-12 <= tau <= ts + 1e-12:
                        _take(tau, &lo, &hi)
    if not hi - lo > 1e-12:
        return False
    b0[0] = s0 + lo
    b1[0] = s0 + hi
    return True


cdef double _first_free(double lo, double hi, Iv* buf, Py_ssize_t n) noexcept nogil:
    cdef double cur = lo
    cdef Py_ssize_t k
    qsort(buf, n, sizeof(Iv), _cmp_iv)
    for k in range(n):
        if buf[k].b0 > cur:
            break
        if buf[k].b1 > cur:
            cur = buf[k].b1
            if cur >= hi:
                break
    return cur


cdef double _earliest(double ax, double ay, double bx, double by, double r, double v,
                      double t_ready, double deadline, double low, double high,
                      const double[:, ::1] segs, Iv* buf) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double T = sqrt(dx * dx + dy * dy) / v
    cdef double lo = fmax(t_ready, low - T)
    cdef double hi = fmin(deadline, high - T)
    cdef double ux, uy, t_top, mnx, mxx, mny, mxy, rr, L, b0, b1, arr
    cdef double x0, y0, x1, y1, s0, s1
    cdef Py_ssize_t k, nb = 0
    cdef bint got
    if not lo < hi:
        return NAN
    if T > 0.0:
        ux = dx / T
        uy = dy / T
        t_top = hi + T
        mnx = fmin(ax, bx)
        mxx = fmax(ax, bx)
        mny = fmin(ay, by)
        mxy = fmax(ay, by)
        for k in range(segs.shape[0]):
            s0 = segs[k, 4]
            s1 = segs[k, 5]
            if s1 <= lo or s0 >= t_top or not s1 > s0:
                continue
            x0 = segs[k, 0]
            y0 = segs[k, 1]
            x1 = segs[k, 2]
            y1 = segs[k, 3]
            rr = r + segs[k, 6]
            if fmin(x0, x1) - rr > mxx or fmax(x0, x1) + rr < mnx or fmin(y0, y1) - rr > mxy or fmax(y0, y1) + rr < mny:
                continue
            if x0 == x1 and y0 == y1:
                got = _blocked_stationary(ax, ay, ux, uy, T, x0, y0, s0, s1, rr, &b0, &b1)
            else:
                L = s1 - s0
                got = _blocked_moving(ax, ay, ux, uy, T, x0, y0, (x1 - x0) / L, (y1 - y0) / L, s0, L, rr, &b0, &b1)
            if got and b1 > lo and b0 < hi:
                buf[nb].b0 = b0
                buf[nb].b1 = b1
                nb += 1
        if nb > 0:
            lo = _first_free(lo, hi, buf, nb)
            if not lo < hi:
                return NAN
    arr = lo + T
    if arr > low:
        return arr
    return low


def earliest_arrival(double ax, double ay, double bx, double by, double r, double v,
                     double t_ready, double deadline, double low, double high,
                     const double[:, ::1] segs):
    cdef Iv* buf = <Iv*>malloc((segs.shape[0] + 1) * sizeof(Iv))
    cdef double res
    if buf == NULL:
        raise MemoryError()
    try:
        res = _earliest(ax, ay, bx, by, r, v, t_ready, deadline, low, high, segs, buf)
    finally:
        free(buf)
    return res


def earliest_arrival_many(const double[:, ::1] src, const double[::1] t_ready, const double[::1] deadline,
                          const double[:, ::1] dst, const double[::1] low, const double[::1] high,
                          double r, double v, const double[:, ::1] segs):
    cdef Py_ssize_t k, n = src.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef Iv* buf = <Iv*>malloc((segs.shape[0] + 1) * sizeof(Iv))
    if buf == NULL:
        raise MemoryError()
    try:
        for k in range(n):
            o[k] = _earliest(src[k, 0], src[k, 1], dst[k, 0], dst[k, 1], r, v,
                             t_ready[k], deadline[k], low[k], high[k], segs, buf)
    finally:
        free(buf)
    return out


def earliest_arrival_sampled(const double[::1] offsets, const double[:, ::1] pts, double T, double r,
                             double t_ready, double deadline, double low, double high,
                             const double[:, ::1] segs):
    cdef double lo = fmax(t_ready, low - T)
    cdef double hi = fmin(deadline, high - T)
    cdef Py_ssize_t m = offsets.shape[0], n = segs.shape[0], k, i, nb = 0
    cdef double t_top, mnx, mxx, mny, mxy, rr, x0, y0, x1, y1, s0, s1, t0, t1, b0, b1, arr, step = 0.0
    cdef Iv* buf
    if not lo < hi:
        return NAN
    t_top = hi + T
    for i in range(1, m):
        step = fmax(step, offsets[i] - offsets[i - 1])
    mnx = INFINITY; mxx = -INFINITY; mny = INFINITY; mxy = -INFINITY
    for i in range(m):
        mnx = fmin(mnx, pts[i, 0]); mxx = fmax(mxx, pts[i, 0])
        mny = fmin(mny, pts[i, 1]); mxy = fmax(mxy, pts[i, 1])
    buf = <Iv*>malloc((m * n + 1) * sizeof(Iv))
    if buf == NULL:
        raise MemoryError()
    try:
        for k in range(n):
            s0 = segs[k, 4]
            s1 = segs[k, 5]
            if s1 <= lo or s0 >= t_top or not s1 > s0:
                continue
            x0 = segs[k, 0]; y0 = segs[k, 1]; x1 = segs[k, 2]; y1 = segs[k, 3]
            rr = r + segs[k, 6]
            if fmin(x0, x1) - rr > mxx or fmax(x0, x1) + rr < mnx or fmin(y0, y1) - rr > mxy or fmax(y0, y1) + rr < mny:
                continue
            for i in range(m):
                if _stationary(pts[i, 0], pts[i, 1], r, segs[k], &t0, &t1):
                    # widened by one sample period, see the Python reference
                    b0 = t0 - offsets[i] - step
                    b1 = t1 - offsets[i] + step
                    if b1 > lo and b0 < hi:
                        buf[nb].b0 = b0
                        buf[nb].b1 = b1
                        nb += 1
        if nb > 0:
            lo = _first_free(lo, hi, buf, nb)
    finally:
        free(buf)
    if not lo < hi:
        return NAN
    arr = lo + T
    if arr > low:
        return arr
    return low
