# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled geometry kernels, arithmetic twin of :mod:`drivelab.kernels.pyref`."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fmod, M_PI

cnp.import_array()


def points_in_polygon(points, polygon):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] poly = np.ascontiguousarray(polygon, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0], v = poly.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t i, j, k
    cdef double x, y, x0, y0, x1, y1, x_int
    cdef int cnt
    for i in range(n):
        x = pts[i, 0]
        y = pts[i, 1]
        cnt = 0
        for j in range(v):
            k = j + 1
            if k == v:
                k = 0
            x0 = poly[j, 0]
            y0 = poly[j, 1]
            x1 = poly[k, 0]
            y1 = poly[k, 1]
            if (y0 > y) != (y1 > y):
                x_int = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
                if x < x_int:
                    cnt += 1
        out[i] = cnt & 1
    return out.astype(bool)


cdef void _corners(double cx, double cy, double h, double length, double width,
                   double* xs, double* ys) nogil:
    cdef double hl = 0.5 * length
    cdef double hw = 0.5 * width
    cdef double ch = cos(h)
    cdef double sh = sin(h)
    # front-left, front-right, rear-right, rear-left
    xs[0] = cx + ch * hl - sh * hw;  ys[0] = cy + sh * hl + ch * hw
    xs[1] = cx + ch * hl + sh * hw;  ys[1] = cy + sh * hl - ch * hw
    xs[2] = cx - ch * hl + sh * hw;  ys[2] = cy - sh * hl - ch * hw
    xs[3] = cx - ch * hl - sh * hw;  ys[3] = cy - sh * hl + ch * hw


cdef bint _rects_overlap_c(double* a, double* b) nogil:
    cdef double ax[4]
    cdef double ay[4]
    cdef double bx[4]
    cdef double by[4]
    cdef double axes[4][2]
    cdef double a_lo, a_hi, b_lo, b_hi, p
    cdef int i, j
    _corners(a[0], a[1], a[2], a[3], a[4], ax, ay)
    _corners(b[0], b[1], b[2], b[3], b[4], bx, by)
    axes[0][0] = cos(a[2]); axes[0][1] = sin(a[2])
    axes[1][0] = -sin(a[2]); axes[1][1] = cos(a[2])
    axes[2][0] = cos(b[2]); axes[2][1] = sin(b[2])
    axes[3][0] = -sin(b[2]); axes[3][1] = cos(b[2])
    for i in range(4):
        a_lo = a_hi = ax[0] * axes[i][0] + ay[0] * axes[i][1]
        b_lo = b_hi = bx[0] * axes[i][0] + by[0] * axes[i][1]
        for j in range(1, 4):
            p = ax[j] * axes[i][0] + ay[j] * axes[i][1]
            if p < a_lo: a_lo = p
            if p > a_hi: a_hi = p
            p = bx[j] * axes[i][0] + by[j] * axes[i][1]
            if p < b_lo: b_lo = p
            if p > b_hi: b_hi = p
        if a_hi <= b_lo or b_hi <= a_lo:
            return False
    return True


def rects_overlap(a, b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ra = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rb = np.ascontiguousarray(b, dtype=np.float64)
    return bool(_rects_overlap_c(&ra[0], &rb[0]))


def first_rect_overlap(ego, others):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] re = np.ascontiguousarray(ego, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ro = np.ascontiguousarray(others, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(ro.shape[0]):
        if _rects_overlap_c(&re[0], &ro[i, 0]):
            return int(i)
    return -1


def corner_distance_sums(cand, expert, weights, double length, double width):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] c = np.ascontiguousarray(cand, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e = np.ascontiguousarray(expert, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t nk = c.shape[0], nh = c.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(nk, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] exs = np.empty((nh, 4), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] eys = np.empty((nh, 4), dtype=np.float64)
    cdef double cxs[4]
    cdef double cys[4]
    cdef Py_ssize_t k, h, j
    cdef double acc, mean, dx, dy
    for h in range(nh):
        _corners(e[h, 0], e[h, 1], e[h, 2], length, width, &exs[h, 0], &eys[h, 0])
    with nogil:
        for k in range(nk):
            acc = 0.0
            for h in range(nh):
                _corners(c[k, h, 0], c[k, h, 1], c[k, h, 2], length, width, cxs, cys)
                mean = 0.0
                for j in range(4):
                    dx = cxs[j] - exs[h, j]
                    dy = cys[j] - eys[h, j]
                    mean += sqrt(dx * dx + dy * dy)
                acc += w[h] * (mean / 4.0)
            out[k] = acc
    return out


def state_distance_sums(cand, expert, weights, comp_weights):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] c = np.ascontiguousarray(cand, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e = np.ascontiguousarray(expert, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cw = np.ascontiguousarray(comp_weights, dtype=np.float64)
    cdef Py_ssize_t nk = c.shape[0], nh = c.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(nk, dtype=np.float64)
    cdef Py_ssize_t k, h
    cdef double acc, dx, dy, dh, dv, wp = cw[0], whd = cw[1], wv = cw[2]
    cdef double two_pi = 2.0 * M_PI
    with nogil:
        for k in range(nk):
            acc = 0.0
            for h in range(nh):
                dx = c[k, h, 0] - e[h, 0]
                dy = c[k, h, 1] - e[h, 1]
                dh = c[k, h, 2] - e[h, 2]
                dh = fmod(dh + M_PI, two_pi)
                if dh < 0.0:
                    dh += two_pi
                dh -= M_PI
                dv = c[k, h, 3] - e[h, 3]
                acc += w[h] * sqrt(wp * (dx * dx + dy * dy) + whd * dh * dh + wv * dv * dv)
            out[k] = acc
    return out


def polyline_nearest(points, line):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ln = np.ascontiguousarray(line, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0], s = ln.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arclen = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cum = np.empty(s + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] seglen = np.empty(s, dtype=np.float64)
    cdef Py_ssize_t i, j, best
    cdef double ax, ay, dx, dy, len2, t, px, py, d2, best_d2, best_t
    cum[0] = 0.0
    for j in range(s):
        dx = ln[j + 1, 0] - ln[j, 0]
        dy = ln[j + 1, 1] - ln[j, 1]
        seglen[j] = sqrt(dx * dx + dy * dy)
        cum[j + 1] = cum[j] + seglen[j]
    with nogil:
        for i in range(n):
            best_d2 = -1.0
            best = 0
            best_t = 0.0
            for j in range(s):
                ax = ln[j, 0]
                ay = ln[j, 1]
                dx = ln[j + 1, 0] - ax
                dy = ln[j + 1, 1] - ay
                len2 = dx * dx + dy * dy
                if len2 < 1e-300:
                    len2 = 1e-300
                t = ((pts[i, 0] - ax) * dx + (pts[i, 1] - ay) * dy) / len2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                px = ax + t * dx - pts[i, 0]
                py = ay + t * dy - pts[i, 1]
                d2 = px * px + py * py
                if best_d2 < 0.0 or d2 < best_d2:
                    best_d2 = d2
                    best = j
                    best_t = t
            dist[i] = sqrt(best_d2)
            arclen[i] = cum[best] + best_t * seglen[best]
    return dist, arclen
