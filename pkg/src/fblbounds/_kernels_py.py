"""Pure numpy implementation of the tilt kernels.

An atom set is a finite measure split into groups.  Group ``g`` owns the
slice ``offsets[g]:offsets[g+1]`` of ``values`` and ``logw``; the weights
inside a group sum to one and the groups are mixed with weights ``gw``.
Every quantity returned here is a ``gw``-weighted sum of per-group
quantities under the exponentially tilted law ``w * exp(lam * v)``.

The compiled module exposes exactly the same functions.
"""

import math

import numpy as np
from scipy.special import erfcx

IMPL = "python"

_SQRT1_2 = math.sqrt(0.5)


def moments(values, logw, offsets, gw, lam):
    """Aggregated tilted moments at a single tilt.

    Returns
    -------
    ndarray, shape (5,)
        ``[cgf, mean, var, m3abs, m3]`` where ``cgf`` is the weighted sum of
        per-group log-partition functions and the rest are weighted sums of
        per-group tilted mean, variance, third absolute central moment and
        third central moment.
    """
    starts = offsets[:-1]
    counts = np.diff(offsets)
    a = logw + lam * values
    amax = np.maximum.reduceat(a, starts)
    e = np.exp(a - np.repeat(amax, counts))
    s = np.add.reduceat(e, starts)
    cgf = amax + np.log(s)
    p = e / np.repeat(s, counts)
    mean = np.add.reduceat(p * values, starts)
    d = values - np.repeat(mean, counts)
    d2 = d * d
    var = np.add.reduceat(p * d2, starts)
    m3 = np.add.reduceat(p * d2 * d, starts)
    m3abs = np.add.reduceat(p * d2 * np.abs(d), starts)
    return np.array([gw @ cgf, gw @ mean, gw @ var, gw @ m3abs, gw @ m3])


def moments_grid(values, logw, offsets, gw, lams):
    """`moments` evaluated at every tilt in ``lams``; shape (len(lams), 5)."""
    lams = np.asarray(lams, dtype=float)
    out = np.empty((lams.size, 5))
    for k, lam in enumerate(lams):
        out[k] = moments(values, logw, offsets, gw, lam)
    return out


def log_g(lam, var, rate, n):
    """Log of ``exp(n lam^2 var / 2) Q(sqrt(n) lam sqrt(var)) exp(-n rate)``."""
    x = math.sqrt(n * var) * lam
    return math.log(0.5 * erfcx(x * _SQRT1_2)) - n * rate


def _log_g_at(values, logw, offsets, gw, n, lam):
    m = moments(values, logw, offsets, gw, lam)
    return log_g(lam, m[2], lam * m[1] - m[0], n)


def bisect_mean(values, logw, offsets, gw, target, lo, hi,
                abs_tol, rel_tol, ftol, max_iter):
    """Tilt at which the aggregated mean equals ``target``.

    The mean is nondecreasing in the tilt, so plain bisection on
    ``[lo, hi]`` applies.  Returns ``(lam, iterations)``.
    """
    it = 0
    mid = 0.5 * (lo + hi)
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        f = moments(values, logw, offsets, gw, mid)[1] - target
        if abs(f) <= ftol:
            break
        if f < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= abs_tol + rel_tol * abs(mid):
            mid = 0.5 * (lo + hi)
            break
    return mid, it


def bisect_log_g(values, logw, offsets, gw, n, log_eps, lo, hi,
                 abs_tol, rel_tol, ftol, max_iter):
    """Tilt at which ``log_g`` equals ``log_eps`` on a decreasing branch."""
    it = 0
    mid = 0.5 * (lo + hi)
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        f = _log_g_at(values, logw, offsets, gw, n, mid) - log_eps
        if abs(f) <= ftol:
            break
        if f > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= abs_tol + rel_tol * abs(mid):
            mid = 0.5 * (lo + hi)
            break
    return mid, it
