"""Named rate bounds and approximations for the best coding rate.

Every function returns rates in nats; ``RateBound.rate_bits`` converts
once at the boundary.  Binary-input symmetric channels (BSC, BEC, AWGN)
use the conditional-entropy tilt with uniform input.  Other channels use
the divergence tilt at an optimized input type: ``t*`` (maximizer of
``I(t) - delta_{t,n}(eps)``) for SO, NEP, the exact converse and the DT
bound, and ``t#`` (maximizer of the Gaussian objective) for Normal.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from .channels import LN2, InputDist, capacity, mutual_information
from .config import DEFAULT
from .errors import BerryEsseenDominates, OutOfRange, Unsupported
from .mirror import p_outer_jar
from .oracle import bimsc_log_tail, exact_converse_delta
from .solve import (invert_delta, optimize_t_sharp, optimize_t_star, q_inv,
                    solve_converse_delta, solve_delta_n, solve_jar_delta)
from .tilted import atoms_for, moments_at, xi_upper

EXACT_TAIL_KINDS = ("bsc", "bec", "z")
NAMES = ("SO", "NEP", "Normal", "NormalLn", "ExactConverseAvg",
         "ExactConverseMax", "JarAchievability", "DTZ")


@dataclass
class RateBound:
    """A rate bound or approximation at one (n, eps) point."""

    name: str
    n: int
    eps: float
    rate_nats: float
    meta: dict = field(default_factory=dict)

    @property
    def rate_bits(self):
        return self.rate_nats / LN2


def _bimsc(ch):
    return ch.is_bimsc


@lru_cache(maxsize=4096)
def _tstar(ch, n, eps, c, cfg):
    return optimize_t_star(ch, n, eps, c, cfg)


def type_for(ch, n, eps, c=None, cfg=DEFAULT, t=None):
    """Input type used by the divergence-tilt bounds (``t*`` unless given)."""
    if t is not None:
        return t if isinstance(t, InputDist) else InputDist(t)
    return _tstar(ch, n, eps, c, cfg)[0]


def _frame(ch, t):
    """Atoms and the leading information term (capacity or I(t))."""
    if _bimsc(ch):
        atoms = atoms_for(ch, None)
        return atoms, math.log(2.0) - atoms.info, None
    atoms = atoms_for(ch, t)
    return atoms, atoms.info, t


def _meta(t, **kw):
    d = dict(kw)
    if t is not None:
        d["t0"] = t.t0
    return d


def so_rate(ch, n, eps, c=None, cfg=DEFAULT, t=None):
    """Second-order formula ``I(t*) - delta_{t*,n}(eps)`` (``C - delta_n`` for symmetric channels)."""
    t = None if _bimsc(ch) else type_for(ch, n, eps, c, cfg, t)
    atoms, info, t = _frame(ch, t)
    sol = solve_delta_n(atoms, n, eps, cfg)
    return RateBound("SO", n, eps, info - sol.value,
                     _meta(t, delta=sol.value, lam=sol.lam, status=sol.status))


def nep_rate(ch, n, eps, c=None, cfg=DEFAULT, t=None, mirror="auto"):
    """SO plus ``-ln(eps)/n + ln P(B)/n``."""
    so = so_rate(ch, n, eps, c, cfg, t)
    tt = None if _bimsc(ch) else InputDist.binary(so.meta["t0"]) if ch.n_inputs == 2 else t
    mb = p_outer_jar(ch, tt, n, so.meta["delta"], mirror, cfg)
    rate = so.rate_nats + (-math.log(eps) + mb.log_prob) / n
    meta = dict(so.meta, log_pb=mb.log_prob, mirror=mb.method)
    return RateBound("NEP", n, eps, rate, meta)


def normal_rate(ch, n, eps, variant="plain", c=None, cfg=DEFAULT):
    """Gaussian approximation ``C - sigma/sqrt(n) Q^{-1}(eps)``.

    ``variant='plus_ln'`` adds ``ln(n)/(2n)`` and is offered for the BSC only.
    Channels other than the symmetric ones use the ``t#`` objective value.
    """
    if not 0 < eps < 1:
        raise OutOfRange("eps must lie in (0, 1)")
    if variant not in ("plain", "plus_ln"):
        raise OutOfRange("variant must be 'plain' or 'plus_ln'")
    if variant == "plus_ln" and ch.kind != "bsc":
        raise Unsupported("the ln(n)/(2n) correction is offered for the BSC only")
    name = "Normal" if variant == "plain" else "NormalLn"
    if _bimsc(ch):
        atoms = atoms_for(ch, None)
        rate = math.log(2.0) - atoms.info - math.sqrt(atoms.raw(0.0)[2] / n) * q_inv(eps)
        meta = {}
    else:
        t, rate = optimize_t_sharp(ch, n, eps, c, cfg)
        meta = _meta(t)
    if variant == "plus_ln":
        rate += math.log(n) / (2.0 * n)
    return RateBound(name, n, eps, rate, meta)


def exact_converse(ch, n, eps, error_model="max", c=None, cfg=DEFAULT, t=None,
                   strict=False, tail="auto", mirror="auto"):
    """Converse bound on the rate of any code with error probability ``eps``.

    Parameters
    ----------
    error_model : {'avg', 'max'}
        Average or maximal error probability.
    strict : bool
        Keep the ``|X| ln(n+1)/n`` type-counting term for non-symmetric
        channels (it is dropped when every codeword shares one type).
    tail : {'auto', 'xi', 'exact'}
        ``exact`` finds the largest deviation whose exact binomial tail
        still exceeds the multiplied ``eps`` (BSC, BEC, Z); ``xi`` replaces
        the tail by the lower sandwich factor times ``e^{-n r}``.  ``auto``
        uses ``exact`` where it is available and ``xi`` otherwise.
    """
    if error_model not in ("avg", "max"):
        raise OutOfRange("error_model must be 'avg' or 'max'")
    if not 0 < eps < 1:
        raise OutOfRange("eps must lie in (0, 1)")
    name = "ExactConverseAvg" if error_model == "avg" else "ExactConverseMax"
    le = math.log(eps)
    s = math.sqrt(-2.0 * le / n)
    if _bimsc(ch):
        atoms = atoms_for(ch, None)
        info = math.log(2.0) - atoms.info
        tt = None
    else:
        tt = type_for(ch, n, eps, c, cfg, t)
        atoms = atoms_for(ch, tt)
        info = atoms.info
    if tail == "auto":
        tail = "exact" if ch.kind in EXACT_TAIL_KINDS else "xi"
    if tail == "xi":
        sol = solve_converse_delta(atoms, n, eps, error_model, cfg)
        delta = sol.value
    elif tail == "exact":
        delta, tt_used = exact_converse_delta(ch, n, eps, error_model, tt)
        if tt_used is not None:
            tt = tt_used
            info = mutual_information(ch, tt)
    else:
        raise OutOfRange("tail must be 'auto', 'xi' or 'exact'")
    if tail == "exact" and ch.kind == "bec" and mirror == "auto":
        # the mirror set is exactly the erasure-count tail event
        lpb = min(bimsc_log_tail(ch, n, delta)[0], 0.0)
    elif delta < 0:
        lpb = 0.0
    else:
        lpb = p_outer_jar(ch, tt, n, delta, mirror, cfg).log_prob
    if _bimsc(ch):
        sigma = math.sqrt(atoms.raw(0.0)[2])
        if error_model == "max":
            corr = le + math.log(s / sigma) - lpb
        else:
            corr = le - lpb + math.log(s * s / (sigma * sigma)) - math.log1p(s / sigma)
        rate = info - delta - corr / n
    else:
        if error_model == "max":
            corr = le - lpb + math.log(s)
        else:
            corr = le - lpb + math.log(s * s) - math.log1p(s)
        rate = info - delta - corr / n
        if strict:
            rate += ch.n_inputs * math.log(n + 1.0) / n
    return RateBound(name, n, eps, rate, _meta(tt, delta=delta, log_pb=lpb, tail=tail))


# ------------------------------------------------------------ achievability

def _be_extra(m, n, cfg):
    return 2.0 * (1.0 - cfg.c_be) * m.m3abs / (math.sqrt(n) * m.sigma2 ** 1.5)


def jar_error_log(atoms, lam, n, cfg=DEFAULT):
    """Log of the jar-decoding error bound at tilt ``lam`` (0 when undefined)."""
    m = moments_at(atoms, lam)
    try:
        xu, _ = xi_upper(m, n, cfg.c_be)
    except BerryEsseenDominates:
        return 0.0
    val = xu + _be_extra(m, n, cfg)
    if not val > 0:
        return 0.0
    return min(math.log(val) - n * m.rate, 0.0)


def jar_achievability(ch, n, delta, t=None, cfg=DEFAULT):
    """Jar-decoding achievable rate and error bound at deviation ``delta``.

    Returns ``(rate_nats, pe_bound)``.
    """
    if not delta > 0:
        raise OutOfRange("delta must be positive")
    atoms, info, t = _frame(ch, None if _bimsc(ch) else (t or InputDist.uniform(ch.n_inputs)))
    lam = invert_delta(atoms, delta, cfg).value
    m = moments_at(atoms, lam)
    xu, _ = xi_upper(m, n, cfg.c_be)
    extra = _be_extra(m, n, cfg)
    pe = (xu + extra) * math.exp(-n * m.rate)
    rate = info - delta - m.rate + math.log(extra) / n
    if not _bimsc(ch):
        rate -= (0.5 + ch.n_inputs) * math.log(n + 1.0) / n
    return rate, pe


def jar_rate(ch, n, eps, c=None, cfg=DEFAULT, t=None):
    """Jar-decoding rate whose error bound equals ``eps``."""
    tt = None if _bimsc(ch) else type_for(ch, n, eps, c, cfg, t)
    atoms, _, tt = _frame(ch, tt)
    sol = solve_jar_delta(atoms, n, eps, cfg)
    rate, pe = jar_achievability(ch, n, sol.value, tt, cfg)
    return RateBound("JarAchievability", n, eps, rate, _meta(tt, delta=sol.value, pe=pe))


# ---------------------------------------------------------- Z-channel DT

def _log_m_minus_one(n, rate_nats):
    x = n * rate_nats
    if x <= 0:
        return -math.inf
    return x if x > 40 else math.log(math.expm1(x))


def dt_z_log(p, n, m, rate_nats):
    """Log of the DT error bound for the Z channel with ``m`` zeros per codeword."""
    i = np.arange(m + 1)
    lc = gammaln(m + 1) - gammaln(i + 1) - gammaln(m - i + 1)
    base = lc + (m - i) * math.log1p(-p) + i * math.log(p)
    lmm1 = _log_m_minus_one(n, rate_nats)
    if lmm1 == -math.inf:
        return -math.inf
    ratio = (gammaln(n - m + i + 1) - gammaln(i + 1) - gammaln(n - m + 1)
             - (gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1)))
    return float(logsumexp(base + np.minimum(0.0, lmm1 + ratio)))


def dt_z(ch, n, rate_nats, t):
    """DT achievability error bound for the Z channel at a given rate.

    ``M = 2^(n R_bits) = e^(n R_nats)`` codewords, all with
    ``m = round(t(0) n)`` zeros.
    """
    if ch.kind != "z":
        raise Unsupported("the DT bound is implemented for the Z channel only")
    t0 = t.t0 if isinstance(t, InputDist) else float(t)
    m = int(round(t0 * n))
    return math.exp(dt_z_log(ch.param, n, m, rate_nats))


def dt_z_rate(ch, n, eps, c=None, cfg=DEFAULT, t=None):
    """Largest rate whose DT error bound does not exceed ``eps``."""
    if ch.kind != "z":
        raise Unsupported("the DT bound is implemented for the Z channel only")
    tt = type_for(ch, n, eps, c, cfg, t)
    m = int(round(tt.t0 * n))
    le = math.log(eps)
    lo, hi = 0.0, math.log(2.0)
    it = 0
    while it < cfg.max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        f = dt_z_log(ch.param, n, m, mid)
        if abs(f - le) <= 1e-12:
            lo = hi = mid
            break
        if f < le:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    return RateBound("DTZ", n, eps, lo, _meta(tt, m=m, iterations=it))


def compute(name, ch, n, eps, c=None, cfg=DEFAULT, error_model="max", tail="auto",
            strict=False):
    """Dispatch a bound by name."""
    if name == "SO":
        return so_rate(ch, n, eps, c, cfg)
    if name == "NEP":
        return nep_rate(ch, n, eps, c, cfg)
    if name == "Normal":
        return normal_rate(ch, n, eps, "plain", c, cfg)
    if name == "NormalLn":
        return normal_rate(ch, n, eps, "plus_ln", c, cfg)
    if name in ("ExactConverseAvg", "ExactConverseMax"):
        em = "avg" if name.endswith("Avg") else "max"
        return exact_converse(ch, n, eps, em, c, cfg, strict=strict, tail=tail)
    if name == "JarAchievability":
        return jar_rate(ch, n, eps, c, cfg)
    if name == "DTZ":
        return dt_z_rate(ch, n, eps, c, cfg)
    raise OutOfRange(f"unknown bound {name!r}")


def capacity_of(ch):
    """Capacity used for the rate sanity invariant."""
    if ch.kind == "matrix":
        from .solve import capacity_generic
        return capacity_generic(ch)[0]
    return capacity(ch)
