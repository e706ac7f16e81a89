"""Root finders and input-law optimizers.

All inversions run on the tilt parameter: the deviation, the g-function
and the sandwich expressions are smooth functions of the tilt, so every
"solve for delta" problem is a one-dimensional bracketed search in the
tilt followed by a single evaluation of the deviation there.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfcx, ndtr, ndtri

from . import kernels
from .channels import InputDist, mutual_information
from .config import DEFAULT
from .errors import (BerryEsseenDominates, BracketFailed, EmptyFeasibleRegion,
                     OutOfRange, OutOfUniqueRange, Unsupported)
from .tilted import (AtomSet, _grid, atoms_for, delta_cap, lambda_plus,
                     log_g_moments, moments_at)

_SQRT1_2 = math.sqrt(0.5)
# bisection on the tilt runs to double precision; the function tolerance
# is what actually stops it
_TIGHT = dict(abs_tol=1e-300, rel_tol=2.3e-16)


def q_func(x):
    """Gaussian tail ``Q(x) = Pr{N(0,1) > x}``."""
    return float(ndtr(-x))


def q_inv(p):
    """Inverse of `q_func` on ``(0, 1)``."""
    if not 0.0 < p < 1.0:
        raise OutOfRange("q_inv needs p in (0, 1)")
    return float(-ndtri(p))


@dataclass
class SolveResult:
    """Outcome of a bracketed solve.

    ``value`` is the solution (a deviation unless stated otherwise), and
    ``lam`` the tilt at which it was found.
    """

    value: float
    residual: float
    bracket: tuple
    iterations: int
    status: str = "converged"
    lam: float = float("nan")
    extra: dict = field(default_factory=dict)


def _atoms(source, t=None):
    return source if isinstance(source, AtomSet) else atoms_for(source, t)


def invert_delta(source, delta, cfg=DEFAULT, t=None):
    """Tilt at which the deviation equals ``delta``.

    ``source`` is an atom set or a channel (with ``t`` as for
    `tilted.atoms_for`).  The deviation is increasing in the tilt, so the
    upper bracket is grown geometrically up to ``cfg.lambda_max`` and the
    root is bisected.
    """
    atoms = _atoms(source, t)
    if delta < 0:
        raise OutOfRange("delta must be nonnegative")
    if delta == 0:
        return SolveResult(0.0, 0.0, (0.0, 0.0), 0, lam=0.0)
    cap = delta_cap(atoms, cfg)
    if delta > cap:
        raise BracketFailed(f"delta {delta:.6g} exceeds the cap {cap:.6g}")
    target = atoms.mean0 + delta
    lo, hi = 0.0, min(1.0, cfg.lambda_max)
    while atoms.raw(hi)[1] < target and hi < cfg.lambda_max:
        lo, hi = hi, min(hi * cfg.lambda_bracket_growth, cfg.lambda_max)
    lam, it = kernels.bisect_mean(atoms.values, atoms.logw, atoms.offsets, atoms.gw,
                                  target, lo, hi, cfg.abs_tol * 1e-3, cfg.rel_tol * 1e-3,
                                  0.0, cfg.max_iter)
    res = float(atoms.raw(lam)[1] - target)
    return SolveResult(lam, res, (lo, hi), it, lam=lam)


def _log_g_lam(atoms, n, lam):
    return log_g_moments(moments_at(atoms, lam), n)


def solve_delta_n(source, n, eps, cfg=DEFAULT, t=None):
    """Solve ``g_n(delta) = eps`` on the branch where g is decreasing.

    Raises
    ------
    OutOfUniqueRange
        When ``eps`` lies below the value of g at the end of the certified
        decreasing branch.
    """
    atoms = _atoms(source, t)
    if not 0.0 < eps <= 0.5:
        raise OutOfRange("eps must lie in (0, 1/2]")
    if eps == 0.5:
        return SolveResult(0.0, 0.0, (0.0, 0.0), 0, lam=0.0)
    lam_hi = lambda_plus(atoms, n, cfg)
    log_eps = math.log(eps)
    if _log_g_lam(atoms, n, lam_hi) > log_eps:
        raise OutOfUniqueRange(
            f"eps={eps:.3g} is below g at the end of the decreasing branch (n={n})")
    ftol = 1e-11
    lam, it = kernels.bisect_log_g(atoms.values, atoms.logw, atoms.offsets, atoms.gw,
                                   float(n), log_eps, 0.0, lam_hi,
                                   _TIGHT["abs_tol"], _TIGHT["rel_tol"], ftol, cfg.max_iter)
    m = moments_at(atoms, lam)
    lg = log_g_moments(m, n)
    status = "converged" if abs(lg - log_eps) <= 1e-10 else "not-converged"
    d_hi = moments_at(atoms, lam_hi).delta
    return SolveResult(m.delta, math.exp(lg) - eps, (0.0, d_hi), it, status, lam)


# ----------------------------------------------------------------- converse

def converse_multiplier(atoms, n, eps, error_model):
    """Factor multiplying eps in the converse's defining inequality."""
    s = math.sqrt(-2.0 * math.log(eps) / n)
    k = 2.0 if error_model == "avg" else 1.0
    if error_model not in ("avg", "max"):
        raise OutOfRange("error_model must be 'avg' or 'max'")
    if atoms.sign > 0:
        sigma = math.sqrt(atoms.raw(0.0)[2])
        return 1.0 + k * s / sigma
    return 1.0 + k * s


def _log_lower_side(g, lams, n, c_be):
    """Vectorized ``ln(xi_lower) - n r`` on a moment grid; -inf where undefined."""
    cgf, mean, var, m3abs = g[:, 0], g[:, 1], g[:, 2], g[:, 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = c_be * m3abs / (math.sqrt(n) * var ** 1.5)
        ok = (beta < 0.25) & (var > 0)
        rho = -ndtri(np.where(ok, 0.5 - 2.0 * beta, 0.5))
        a = np.sqrt(n * var) * lams
        lx = np.log(0.5 * erfcx((a + rho) * _SQRT1_2)) - a * rho - 0.5 * rho * rho
        rate = np.maximum(lams * mean - cgf, 0.0)
        out = lx - n * rate
    return np.where(ok, out, -np.inf)


def _lower_side_at(atoms, lam, n, c_be):
    g = atoms.raw(lam)[None, :]
    return float(_log_lower_side(g, np.array([lam]), n, c_be)[0])


def solve_converse_delta(source, n, eps, error_model="max", cfg=DEFAULT, t=None):
    """Largest deviation with ``mult * eps <= xi_lower e^{-n r}``.

    Where the lower sandwich factor is undefined (Berry-Esseen term at
    least 1/4) the right-hand side is taken as zero.  The tilt grid is
    scanned from the top for the last point satisfying the inequality,
    and the crossing just above it is bisected.
    """
    atoms = _atoms(source, t)
    if not 0.0 < eps < 1.0:
        raise OutOfRange("eps must lie in (0, 1)")
    mult = converse_multiplier(atoms, n, eps, error_model)
    target = mult * eps
    if target >= 1.0:
        raise OutOfRange(f"multiplied eps {target:.3g} >= 1")
    lt = math.log(target)
    lams, g = _grid(atoms, cfg.lambda_max, cfg.lambda_grid)
    f = _log_lower_side(g, lams, n, cfg.c_be) - lt
    good = np.flatnonzero(f >= 0)
    if good.size == 0:
        raise BerryEsseenDominates(
            f"no tilt satisfies the converse inequality at n={n}, eps={eps:.3g}")
    k = int(good[-1])
    if k == lams.size - 1:
        lam = float(lams[k])
        it = 0
        lo = hi = lam
    else:
        lo, hi = float(lams[k]), float(lams[k + 1])
        it = 0
        while it < cfg.max_iter:
            it += 1
            mid = 0.5 * (lo + hi)
            if _lower_side_at(atoms, mid, n, cfg.c_be) - lt >= 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, mid):
                break
        lam = lo
    m = moments_at(atoms, lam)
    res = _lower_side_at(atoms, lam, n, cfg.c_be) - lt
    return SolveResult(m.delta, res, (float(lams[k]), hi), it, lam=lam,
                       extra={"multiplier": mult})


def solve_jar_delta(source, n, eps, cfg=DEFAULT, t=None):
    """Smallest deviation whose jar-decoding error bound is at most ``eps``."""
    from .bounds import jar_error_log
    atoms = _atoms(source, t)
    lt = math.log(eps)
    lams, _ = _grid(atoms, cfg.lambda_max, cfg.lambda_grid)
    vals = np.array([jar_error_log(atoms, lam, n, cfg) for lam in lams])
    ok = np.flatnonzero(vals <= lt)
    if ok.size == 0:
        raise BerryEsseenDominates(f"jar bound never reaches eps={eps:.3g} at n={n}")
    k = int(ok[0])
    if k == 0:
        lam = float(lams[0])
        it = 0
        hi = lam
    else:
        lo, hi = float(lams[k - 1]), float(lams[k])
        it = 0
        while it < cfg.max_iter:
            it += 1
            mid = 0.5 * (lo + hi)
            if jar_error_log(atoms, mid, n, cfg) <= lt:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * max(1.0, mid):
                break
        lam = hi
    m = moments_at(atoms, lam)
    return SolveResult(m.delta, jar_error_log(atoms, lam, n, cfg) - lt,
                       (float(lams[max(k - 1, 0)]), hi), it, lam=lam)


# ------------------------------------------------------------ 1-D searches

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, a, b, tol=1e-10, max_iter=200):
    """Golden-section maximization of a unimodal ``f`` on ``[a, b]``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def bisect_increasing(f, lo, hi, tol=1e-13, max_iter=200):
    """Root of an increasing function with ``f(lo) < 0 <= f(hi)``."""
    it = 0
    while hi - lo > tol and it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _feasible_interval(ch, c, tol=1e-13):
    """Interval of t(0) with ``I(t) >= c`` for a binary-input channel."""
    grid = np.linspace(0.0, 1.0, 257)
    vals = np.array([mutual_information(ch, InputDist.binary(x)) for x in grid])
    k = int(np.argmax(vals))
    if vals[k] < c:
        raise EmptyFeasibleRegion(f"no input law reaches I >= {c:.6g}")
    info = lambda x: mutual_information(ch, InputDist.binary(x)) - c
    lo = 0.0 if vals[0] >= c else bisect_increasing(info, grid[0], grid[k], tol)
    hi = 1.0 if vals[-1] >= c else bisect_increasing(lambda x: -info(x), grid[k], grid[-1], tol)
    # nudge inward so every probe is strictly feasible
    while lo < hi and info(lo) < 0:
        lo = min(lo + tol, hi)
    while hi > lo and info(hi) < 0:
        hi = max(hi - tol, lo)
    return lo, hi


def _maximize_binary(ch, objective, c, n_scan=256, tol=1e-10):
    lo, hi = _feasible_interval(ch, c)
    if hi - lo < 1e-12:
        x = 0.5 * (lo + hi)
        return x, objective(x)
    grid = np.linspace(lo, hi, n_scan + 1)
    vals = np.array([objective(x) for x in grid])
    if not np.any(np.isfinite(vals)):
        raise EmptyFeasibleRegion("objective undefined on the feasible set")
    k = int(np.argmax(vals))  # first maximizer: ties go to smaller t(0)
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_scan)]
    x, v = golden_max(objective, a, b, tol)
    if vals[k] >= v:
        x, v = float(grid[k]), float(vals[k])
    return float(x), float(v)


def _coordinate_search(ch, objective_t, c, sweeps=30, tol=1e-10):
    k = ch.n_inputs
    t = capacity_generic(ch)[1].probs.copy()
    best = objective_t(t)
    for _ in range(sweeps):
        old = best
        for i in range(k):
            for j in range(i + 1, k):
                s = t[i] + t[j]
                if s <= 0:
                    continue

                def f(u, i=i, j=j, s=s):
                    tt = t.copy()
                    tt[i], tt[j] = u * s, (1 - u) * s
                    if mutual_information(ch, InputDist(tt / tt.sum())) < c:
                        return -np.inf
                    return objective_t(tt / tt.sum())

                u, v = golden_max(f, 0.0, 1.0, tol)
                if v > best:
                    t[i], t[j] = u * s, (1 - u) * s
                    t /= t.sum()
                    best = v
        if best - old <= tol:
            break
    return InputDist(t), best


def _safe(fn):
    def wrapped(x):
        try:
            return fn(x)
        except (OutOfUniqueRange, BerryEsseenDominates, BracketFailed, OutOfRange):
            return -np.inf
    return wrapped


def so_objective(ch, t, n, eps, cfg=DEFAULT):
    """``I(t;P) - delta_{t,n}(eps)``."""
    atoms = atoms_for(ch, t)
    return atoms.info - solve_delta_n(atoms, n, eps, cfg).value


def normal_objective(ch, t, n, eps, cfg=DEFAULT):
    """``I(t;P) - sigma_D(t)/sqrt(n) Q^{-1}(eps)``."""
    atoms = atoms_for(ch, t)
    return atoms.info - math.sqrt(atoms.raw(0.0)[2] / n) * q_inv(eps)


def _default_c(ch, c):
    if c is not None:
        return c
    if ch.kind == "matrix":
        return 0.5 * capacity_generic(ch)[0]
    from .channels import capacity
    return 0.5 * capacity(ch)


def _optimize(ch, n, eps, c, cfg, obj):
    c = _default_c(ch, c)
    if c <= 0:
        raise OutOfRange("c must be positive")
    if ch.n_inputs == 2:
        f = _safe(lambda x: obj(ch, InputDist.binary(x), n, eps, cfg))
        x, v = _maximize_binary(ch, f, c)
        if not math.isfinite(v):
            raise EmptyFeasibleRegion("objective undefined on the feasible set")
        return InputDist.binary(x), v
    f = _safe(lambda tt: obj(ch, InputDist(tt), n, eps, cfg))
    return _coordinate_search(ch, f, c)


def optimize_t_star(ch, n, eps, c=None, cfg=DEFAULT):
    """Maximize ``I(t;P) - delta_{t,n}(eps)`` over ``{t : I(t;P) >= c}``.

    ``c`` defaults to half the capacity.  Returns ``(t, value)``.
    """
    return _optimize(ch, n, eps, c, cfg, so_objective)


def optimize_t_sharp(ch, n, eps, c=None, cfg=DEFAULT):
    """Maximize ``I(t;P) - sigma_D(t)/sqrt(n) Q^{-1}(eps)`` over ``{I >= c}``."""
    return _optimize(ch, n, eps, c, cfg, normal_objective)


# ---------------------------------------------------------------- capacity

def capacity_generic(ch, tol=1e-12, max_iter=100000):
    """Blahut-Arimoto capacity of a discrete channel.

    Returns ``(capacity_nats, InputDist)``.  Stops when the upper and lower
    capacity estimates differ by less than ``tol``.
    """
    if not ch.is_discrete:
        raise Unsupported("Blahut-Arimoto needs a discrete output alphabet")
    W = np.asarray(ch.matrix)
    k = W.shape[0]
    r = np.full(k, 1.0 / k)
    logW = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)), 0.0)
    for _ in range(max_iter):
        q = r @ W
        logq = np.log(np.where(q > 0, q, 1.0))
        d = np.sum(W * (logW - logq), axis=1)
        lower = float(r @ d)
        upper = float(d.max())
        if upper - lower < tol:
            break
        r = r * np.exp(d - d.max())
        r /= r.sum()
    return lower, InputDist(r / r.sum())
