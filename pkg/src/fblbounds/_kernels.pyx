# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tilt kernels; same API as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs
from scipy.special.cython_special cimport erfcx

cnp.import_array()

IMPL = "cython"

cdef double SQRT1_2 = 0.7071067811865476


cdef void _moments(const double[::1] v, const double[::1] lw,
                   const long[::1] off, const double[::1] gw,
                   double lam, double* out) noexcept nogil:
    cdef Py_ssize_t g, j, ng = off.shape[0] - 1
    cdef double amax, a, s, e, mu, d, d2, var, m3, m3abs, cgf, wg
    cdef double acgf = 0.0, amean = 0.0, avar = 0.0, am3abs = 0.0, am3 = 0.0
    for g in range(ng):
        wg = gw[g]
        amax = -1e308
        for j in range(off[g], off[g + 1]):
            a = lw[j] + lam * v[j]
            if a > amax:
                amax = a
        s = 0.0
        mu = 0.0
        for j in range(off[g], off[g + 1]):
            e = exp(lw[j] + lam * v[j] - amax)
            s += e
            mu += e * v[j]
        mu /= s
        cgf = amax + log(s)
        var = 0.0
        m3 = 0.0
        m3abs = 0.0
        for j in range(off[g], off[g + 1]):
            e = exp(lw[j] + lam * v[j] - amax) / s
            d = v[j] - mu
            d2 = d * d
            var += e * d2
            m3 += e * d2 * d
            m3abs += e * d2 * fabs(d)
        acgf += wg * cgf
        amean += wg * mu
        avar += wg * var
        am3abs += wg * m3abs
        am3 += wg * m3
    out[0] = acgf
    out[1] = amean
    out[2] = avar
    out[3] = am3abs
    out[4] = am3


cdef inline double _log_g(double lam, double var, double rate, double n) noexcept nogil:
    cdef double x = sqrt(n * var) * lam
    return log(0.5 * erfcx(x * SQRT1_2)) - n * rate


def moments(const double[::1] values, const double[::1] logw,
            const long[::1] offsets, const double[::1] gw, double lam):
    """Aggregated tilted moments ``[cgf, mean, var, m3abs, m3]``."""
    out = np.empty(5)
    cdef double[::1] o = out
    _moments(values, logw, offsets, gw, lam, &o[0])
    return out


def moments_grid(const double[::1] values, const double[::1] logw,
                 const long[::1] offsets, const double[::1] gw, lams):
    """Moments at every tilt in ``lams``; shape (len(lams), 5)."""
    cdef double[::1] lv = np.ascontiguousarray(lams, dtype=np.float64)
    out = np.empty((lv.shape[0], 5))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(lv.shape[0]):
            _moments(values, logw, offsets, gw, lv[k], &o[k, 0])
    return out


def log_g(double lam, double var, double rate, double n):
    """Log of ``exp(n lam^2 var / 2) Q(sqrt(n) lam sqrt(var)) exp(-n rate)``."""
    return _log_g(lam, var, rate, n)


def bisect_mean(const double[::1] values, const double[::1] logw,
                const long[::1] offsets, const double[::1] gw,
                double target, double lo, double hi,
                double abs_tol, double rel_tol, double ftol, int max_iter):
    """Tilt at which the aggregated mean equals ``target``."""
    cdef double m[5]
    cdef double mid = 0.5 * (lo + hi), f
    cdef int it = 0
    with nogil:
        while it < max_iter:
            it += 1
            mid = 0.5 * (lo + hi)
            _moments(values, logw, offsets, gw, mid, m)
            f = m[1] - target
            if fabs(f) <= ftol:
                break
            if f < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= abs_tol + rel_tol * fabs(mid):
                mid = 0.5 * (lo + hi)
                break
    return mid, it


def bisect_log_g(const double[::1] values, const double[::1] logw,
                 const long[::1] offsets, const double[::1] gw,
                 double n, double log_eps, double lo, double hi,
                 double abs_tol, double rel_tol, double ftol, int max_iter):
    """Tilt at which ``log_g`` equals ``log_eps`` on a decreasing branch."""
    cdef double m[5]
    cdef double mid = 0.5 * (lo + hi), f
    cdef int it = 0
    with nogil:
        while it < max_iter:
            it += 1
            mid = 0.5 * (lo + hi)
            _moments(values, logw, offsets, gw, mid, m)
            f = _log_g(mid, m[2], mid * m[1] - m[0], n) - log_eps
            if fabs(f) <= ftol:
                break
            if f > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= abs_tol + rel_tol * fabs(mid):
                mid = 0.5 * (lo + hi)
                break
    return mid, it
