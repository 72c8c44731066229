# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for superposed circular-loop fields.

Mirrors ``_pykernel`` point by point. Each point is handled by one thread and
the coil sum runs in fixed index order, so results do not depend on the
thread count.
"""
import numpy as np
cimport numpy as cnp
from . import _pykernel
from cython.parallel cimport prange
from libc.math cimport sqrt, fabs, hypot, INFINITY, M_PI

cnp.import_array()

cdef double MU0 = 1.25663706212e-6
cdef double AGM_TOL = 1e-15
cdef double FILAMENT_EPS = 1e-12
cdef double SMALL_M = _pykernel.SMALL_M
cdef enum:
    N_SERIES = 16
cdef double RADIAL_SERIES[N_SERIES]
for _k, _g in enumerate(_pykernel.radial_series_coefficients(N_SERIES)):
    RADIAL_SERIES[_k] = _g


cdef inline double radial_series(double m) noexcept nogil:
    cdef double s = 0.0
    cdef int k
    for k in range(N_SERIES - 1, -1, -1):
        s = s * m + RADIAL_SERIES[k]
    return s


cdef inline void agm_ke(double m, double* K, double* E) noexcept nogil:
    cdef double a = 1.0
    cdef double b = sqrt(1.0 - m)
    cdef double c, an
    cdef double weight = 0.5
    cdef double acc = weight * m
    cdef int it
    for it in range(64):
        if fabs(a - b) <= AGM_TOL * a:
            break
        c = 0.5 * (a - b)
        an = 0.5 * (a + b)
        b = sqrt(a * b)
        a = an
        weight = weight * 2.0
        acc = acc + weight * c * c
    K[0] = M_PI / (2.0 * a)
    E[0] = K[0] * (1.0 - acc)


cdef inline double point_field(double px, double py, double pz,
                               const double[:, ::1] centers,
                               const double[:, :, ::1] frames,
                               const double[::1] radius,
                               const double[::1] current,
                               double* out, long* bad) noexcept nogil:
    """Accumulate B at one point into out[0:3]; return min filament distance."""
    cdef Py_ssize_t c, C = centers.shape[0]
    cdef double dx, dy, dz, x, y, z, rho, R, R2, sq, alpha2, beta2, beta
    cdef double m, K, E, pref, Bz, Brho, dist, cos_p, sin_p
    cdef double bx = 0.0, by = 0.0, bz = 0.0
    cdef double dmin = INFINITY
    bad[0] = -1
    for c in range(C):
        dx = px - centers[c, 0]
        dy = py - centers[c, 1]
        dz = pz - centers[c, 2]
        x = frames[c, 0, 0] * dx + frames[c, 0, 1] * dy + frames[c, 0, 2] * dz
        y = frames[c, 1, 0] * dx + frames[c, 1, 1] * dy + frames[c, 1, 2] * dz
        z = frames[c, 2, 0] * dx + frames[c, 2, 1] * dy + frames[c, 2, 2] * dz
        rho = hypot(x, y)
        R = radius[c]
        dist = hypot(rho - R, z)
        if dist < dmin:
            dmin = dist
        if dist <= FILAMENT_EPS:
            if bad[0] < 0:
                bad[0] = c
            continue
        R2 = R * R
        sq = R2 + z * z + rho * rho
        alpha2 = sq - 2.0 * R * rho
        beta2 = sq + 2.0 * R * rho
        beta = sqrt(beta2)
        m = 1.0 - alpha2 / beta2
        if m < 0.0:
            m = 0.0
        agm_ke(m, &K, &E)
        pref = MU0 * current[c] / M_PI
        Bz = pref / (2.0 * alpha2 * beta) * ((R2 - rho * rho - z * z) * E + alpha2 * K)
        if m < SMALL_M:
            Brho = 4.0 * M_PI * pref * z * R2 * rho * radial_series(m) / (alpha2 * beta2 * beta)
        else:
            Brho = pref * z / (2.0 * alpha2 * beta * rho) * (sq * E - alpha2 * K)
        if rho > 0.0:
            cos_p = x / rho
            sin_p = y / rho
        else:
            cos_p = 0.0
            sin_p = 0.0
        x = Brho * cos_p
        y = Brho * sin_p
        bx = bx + x * frames[c, 0, 0] + y * frames[c, 1, 0] + Bz * frames[c, 2, 0]
        by = by + x * frames[c, 0, 1] + y * frames[c, 1, 1] + Bz * frames[c, 2, 1]
        bz = bz + x * frames[c, 0, 2] + y * frames[c, 1, 2] + Bz * frames[c, 2, 2]
    out[0] = bx
    out[1] = by
    out[2] = bz
    return dmin


def bfield(points, centers, frames, radius, current, int threads=1):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] Cn = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[:, :, ::1] Fr = np.ascontiguousarray(frames, dtype=np.float64)
    cdef const double[::1] Rd = np.ascontiguousarray(radius, dtype=np.float64)
    cdef const double[::1] Cu = np.ascontiguousarray(current, dtype=np.float64)
    cdef Py_ssize_t M = P.shape[0], i
    B = np.zeros((M, 3))
    dmin = np.empty(M)
    bad = np.empty(M, dtype=np.int64)
    cdef double[:, ::1] Bv = B
    cdef double[::1] Dv = dmin
    cdef long[::1] bv = bad
    for i in prange(M, nogil=True, num_threads=threads, schedule="static"):
        Dv[i] = point_field(P[i, 0], P[i, 1], P[i, 2], Cn, Fr, Rd, Cu, &Bv[i, 0], &bv[i])
    return B, dmin, bad


def bfield_jacobian(points, centers, frames, radius, current,
                    double h_min=1e-9, double h_rel=1e-6, int threads=1):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, ::1] Cn = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[:, :, ::1] Fr = np.ascontiguousarray(frames, dtype=np.float64)
    cdef const double[::1] Rd = np.ascontiguousarray(radius, dtype=np.float64)
    cdef const double[::1] Cu = np.ascontiguousarray(current, dtype=np.float64)
    cdef Py_ssize_t M = P.shape[0], i
    B = np.zeros((M, 3))
    J = np.zeros((M, 3, 3))
    bad = np.empty(M, dtype=np.int64)
    cdef double[:, ::1] Bv = B
    cdef double[:, :, ::1] Jv = J
    cdef long[::1] bv = bad
    for i in prange(M, nogil=True, num_threads=threads, schedule="static"):
        _jac_point(i, P, Cn, Fr, Rd, Cu, h_min, h_rel, Bv, Jv, bv)
    return B, J, bad


cdef void _jac_point(Py_ssize_t i, const double[:, ::1] P,
                     const double[:, ::1] Cn, const double[:, :, ::1] Fr,
                     const double[::1] Rd, const double[::1] Cu,
                     double h_min, double h_rel,
                     double[:, ::1] Bv, double[:, :, ::1] Jv, long[::1] bv) noexcept nogil:
    cdef double p[3]
    cdef double q[3]
    cdef double fp[3]
    cdef double fm[3]
    cdef double fp2[3]
    cdef double fm2[3]
    cdef double dmin, h, d_h, d_h2
    cdef long b0, bs
    cdef int j, k
    p[0] = P[i, 0]
    p[1] = P[i, 1]
    p[2] = P[i, 2]
    dmin = point_field(p[0], p[1], p[2], Cn, Fr, Rd, Cu, &Bv[i, 0], &b0)
    if dmin == INFINITY:
        dmin = 0.0
    h = h_rel * dmin
    if h < h_min:
        h = h_min
    for j in range(3):
        q[0] = p[0]
        q[1] = p[1]
        q[2] = p[2]
        q[j] = p[j] + h
        point_field(q[0], q[1], q[2], Cn, Fr, Rd, Cu, fp, &bs)
        if bs > b0:
            b0 = bs
        q[j] = p[j] - h
        point_field(q[0], q[1], q[2], Cn, Fr, Rd, Cu, fm, &bs)
        if bs > b0:
            b0 = bs
        q[j] = p[j] + 0.5 * h
        point_field(q[0], q[1], q[2], Cn, Fr, Rd, Cu, fp2, &bs)
        if bs > b0:
            b0 = bs
        q[j] = p[j] - 0.5 * h
        point_field(q[0], q[1], q[2], Cn, Fr, Rd, Cu, fm2, &bs)
        if bs > b0:
            b0 = bs
        for k in range(3):
            d_h = (fp[k] - fm[k]) / (2.0 * h)
            d_h2 = (fp2[k] - fm2[k]) / h
            Jv[i, k, j] = (4.0 * d_h2 - d_h) / 3.0
    bv[i] = b0
