"""Tilted distributions, rate functions, sandwich factors and g.

Two statistics are handled with one machinery.

* Conditional-entropy tilt (binary-input symmetric channels):
  ``v = -ln p(X|Y)`` under uniform input, a single group.
* Divergence tilt (any discrete-input channel, input law ``t``):
  ``v = -ln(p(Y|x)/q_t(Y))`` with one group per input ``x`` weighted by
  ``t(x)``; each group is tilted and normalized separately.

In both cases the deviation is ``delta(lam) = mean(lam) - mean(0)``, the
rate is ``r = lam * mean(lam) - cgf(lam)`` and the derivative identities
``d delta / d lam = sigma2`` and ``d sigma2 / d lam = E[central m3 of v]``
hold exactly for the finite atom sets used here.  The reported third
central moment follows the sign convention of the statistic each bound is
written in: ``m3`` of ``v`` for the entropy tilt, ``m3`` of ``-v`` (the
information density) for the divergence tilt.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfcx, ndtri

from . import kernels
from .channels import (LN2, InputDist, OutputDist, _as_input,
                       awgn_conditional_atoms)
from .config import DEFAULT
from .errors import (BerryEsseenDominates, DegenerateVariance, NotSymmetric,
                     OutOfRange, UnsupportedSupport)

_SQRT1_2 = math.sqrt(0.5)
_VAR_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class AtomSet:
    """Grouped finite measure carrying the statistic ``v``.

    ``sign`` is +1 for the entropy tilt and -1 for the divergence tilt; it
    converts the third central moment of ``v`` into the reported ``m3``.
    ``info`` is H(X|Y) or I(t;P) respectively.
    """

    values: np.ndarray
    logw: np.ndarray
    offsets: np.ndarray
    gw: np.ndarray
    mean0: float
    info: float
    sign: int
    label: str = ""

    def raw(self, lam):
        """``[cgf, mean, var, m3abs, m3(v)]`` at tilt ``lam``."""
        return kernels.moments(self.values, self.logw, self.offsets, self.gw, float(lam))

    def raw_grid(self, lams):
        return kernels.moments_grid(self.values, self.logw, self.offsets, self.gw,
                                    np.ascontiguousarray(lams, dtype=float))

    @property
    def max_deviation(self):
        """Supremum of ``delta``: largest attainable mean minus the base mean."""
        tops = [self.values[a:b].max() for a, b in zip(self.offsets[:-1], self.offsets[1:])]
        return float(self.gw @ np.array(tops)) - self.mean0


def _atomset(groups, gw, sign, info, label):
    values = np.ascontiguousarray(np.concatenate([g[0] for g in groups]), dtype=float)
    logw = np.ascontiguousarray(np.concatenate([g[1] for g in groups]), dtype=float)
    offsets = np.zeros(len(groups) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(g[0]) for g in groups])
    gw = np.ascontiguousarray(gw, dtype=float)
    for a in (values, logw, offsets, gw):
        a.setflags(write=False)
    mean0 = float(kernels.moments(values, logw, offsets, gw, 0.0)[1])
    if info is None:
        info = mean0
    return AtomSet(values, logw, offsets, gw, mean0, info, sign, label)


@lru_cache(maxsize=64)
def bimsc_atoms(ch):
    """Atoms of ``-ln p(X|Y)`` under uniform input."""
    if not ch.is_bimsc:
        raise NotSymmetric(f"{ch.label()} is not a binary-input symmetric channel")
    if ch.kind == "bsc":
        p = ch.param
        v = np.array([-math.log1p(-p), -math.log(p)])
        w = np.array([1.0 - p, p])
    elif ch.kind == "bec":
        p = ch.param
        v = np.array([0.0, LN2])
        w = np.array([1.0 - p, p])
    else:
        # by symmetry condition on X=0, which is sent as +1
        y = 1.0 + math.sqrt(ch.sigma2) * ch.nodes
        v = np.logaddexp(0.0, -2.0 * y / ch.sigma2)
        w = ch.qweights
    return _atomset([(v, np.log(w))], [1.0], +1, None, ch.label())


def _dimc_groups(ch, t):
    groups, gw = [], []
    q = None
    if ch.is_discrete:
        q = t.probs @ ch.matrix
    for x, tx in enumerate(t.probs):
        if tx == 0:
            continue
        if ch.is_discrete:
            row = ch.matrix[x]
            nz = row > 0
            if not nz.any():
                raise UnsupportedSupport(f"input {x} has an all-zero row")
            v = -(np.log(row[nz]) - np.log(q[nz]))
            lw = np.log(row[nz])
        else:
            w, logp, logq = awgn_conditional_atoms(ch, t, x)
            v = -(logp - logq)
            lw = np.log(w)
        groups.append((v, lw))
        gw.append(tx)
    return groups, gw


@lru_cache(maxsize=4096)
def _dimc_atoms_cached(ch, key):
    t = InputDist(np.array(key))
    groups, gw = _dimc_groups(ch, t)
    a = _atomset(groups, gw, -1, None, ch.label())
    return AtomSet(a.values, a.logw, a.offsets, a.gw, a.mean0, -a.mean0, -1, a.label)


def dimc_atoms(ch, t):
    """Atoms of ``-ln(p(Y|x)/q_t(Y))`` grouped by input and weighted by t."""
    t = _as_input(ch, t)
    return _dimc_atoms_cached(ch, tuple(float(x) for x in t.probs))


@dataclass(frozen=True)
class TiltedMoments:
    """Tilted moment bundle at one tilt.

    Attributes
    ----------
    lam : float
        Tilt parameter.
    delta : float
        Deviation ``mean(lam) - mean(0)``.
    sigma2, m3abs : float
        (Group-averaged) tilted variance and third absolute central moment.
    m3 : float
        Signed third central moment in the reporting convention.
    rate : float
        Rate function at ``delta``.
    dsigma2 : float
        Derivative of ``sigma2`` with respect to the tilt.
    """

    lam: float
    delta: float
    sigma2: float
    m3abs: float
    m3: float
    rate: float
    dsigma2: float


def moments_at(atoms, lam):
    """Evaluate a `TiltedMoments` bundle on an atom set."""
    if lam < 0:
        raise OutOfRange("tilt must be nonnegative")
    cgf, mean, var, m3abs, m3v = atoms.raw(lam)
    rate = max(lam * mean - cgf, 0.0)
    return TiltedMoments(float(lam), float(mean - atoms.mean0), float(var),
                         float(m3abs), float(atoms.sign * m3v), float(rate), float(m3v))


def _check_variance(atoms):
    var0 = atoms.raw(0.0)[2]
    if not var0 > _VAR_FLOOR:
        raise DegenerateVariance("the information density is deterministic under this input")


def bimsc_tilt(ch, lam):
    """Conditional-entropy tilted moments for BSC, BEC or AWGN channels."""
    return moments_at(bimsc_atoms(ch), lam)


def dimc_tilt(ch, t, lam):
    """Divergence-tilted moments for input law ``t``."""
    atoms = dimc_atoms(ch, t)
    _check_variance(atoms)
    return moments_at(atoms, lam)


def atoms_for(ch, t=None):
    """Entropy-tilt atoms when ``t`` is None, else divergence-tilt atoms."""
    if t is None:
        return bimsc_atoms(ch)
    atoms = dimc_atoms(ch, t)
    _check_variance(atoms)
    return atoms


# ----------------------------------------------------------------- sandwich

@dataclass(frozen=True)
class XiPair:
    xi_upper: float
    xi_lower: float
    rho_star: float
    rho_sub: float


def be_ratio(m, n, c_be=DEFAULT.c_be):
    """Berry-Esseen term ``c_be * M / (sqrt(n) sigma^3)``."""
    return c_be * m.m3abs / (math.sqrt(n) * m.sigma2 ** 1.5)


def _scaled_q(a, rho):
    """``exp(a^2/2) Q(a + rho)`` without overflow."""
    u = a + rho
    return 0.5 * erfcx(u * _SQRT1_2) * math.exp(-a * rho - 0.5 * rho * rho)


def xi_upper(m, n, c_be=DEFAULT.c_be):
    """Upper sandwich factor; raises when ``Q(rho*) = beta`` has no solution."""
    beta = be_ratio(m, n, c_be)
    if not beta < 1.0:
        raise BerryEsseenDominates(f"Berry-Esseen term {beta:.3g} >= 1")
    rho = float(-ndtri(beta))
    a = math.sqrt(n * m.sigma2) * m.lam
    return 2.0 * beta + 0.5 * erfcx(a * _SQRT1_2) - _scaled_q(a, rho), rho


def log_xi_lower(m, n, c_be=DEFAULT.c_be):
    """Log of the lower sandwich factor; raises when ``beta >= 1/4``."""
    beta = be_ratio(m, n, c_be)
    if not beta < 0.25:
        raise BerryEsseenDominates(f"Berry-Esseen term {beta:.3g} >= 1/4")
    rho = float(-ndtri(0.5 - 2.0 * beta))
    a = math.sqrt(n * m.sigma2) * m.lam
    u = a + rho
    return math.log(0.5 * erfcx(u * _SQRT1_2)) - a * rho - 0.5 * rho * rho, rho


def xi_pair(m, n, c_be=DEFAULT.c_be):
    """Both sandwich factors at block length ``n``."""
    up, rs = xi_upper(m, n, c_be)
    lo, rsub = log_xi_lower(m, n, c_be)
    return XiPair(up, math.exp(lo), rs, rsub)


# ---------------------------------------------------------------------- g

def log_g_moments(m, n):
    """``ln g`` from a moment bundle."""
    return kernels.log_g(m.lam, m.sigma2, m.rate, float(n))


def g_eval(ch, t, n, delta, cfg=DEFAULT):
    """``exp(n lam^2 s2/2) Q(sqrt(n) lam s) exp(-n r(delta))`` with lam = r'(delta).

    ``t=None`` selects the conditional-entropy tilt of a symmetric channel.
    """
    from .solve import invert_delta
    atoms = atoms_for(ch, t)
    lam = invert_delta(atoms, delta, cfg).value
    return math.exp(log_g_moments(moments_at(atoms, lam), n))


@lru_cache(maxsize=256)
def _grid(atoms, lam_max, k):
    u = np.linspace(0.0, 1.0, k + 1)
    lams = lam_max * u * u
    return lams, atoms.raw_grid(lams)


def lambda_plus(atoms, n=None, cfg=DEFAULT):
    """Largest grid tilt up to which ``g`` is certified decreasing.

    A tilt passes when ``d sigma2/d lam >= 0`` or
    ``|lam dsigma2| < 2 sigma2 (1 + n lam^2 sigma2)``.  With ``n=None`` the
    block-length-free condition ``|lam dsigma2| < 2 sigma2`` is used.
    """
    lams, g = _grid(atoms, cfg.lambda_max, cfg.lambda_grid)
    var, ds = g[:, 2], g[:, 4]
    nn = 0.0 if n is None else float(n)
    ok = (ds >= 0) | (np.abs(lams * ds) < 2.0 * var * (1.0 + nn * lams * lams * var))
    ok &= var > 0
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return float(lams[-1])
    return float(lams[max(bad[0] - 1, 0)])


def delta_cap(atoms, cfg=DEFAULT):
    """Soft cap on deviations: ``delta`` at the largest considered tilt."""
    return float(atoms.raw(cfg.lambda_max)[1] - atoms.mean0)


# ---------------------------------------------------------- entropy tails

def entropy_tail_rate(dist, delta, side, cfg=DEFAULT):
    """Chernoff exponent for the empirical entropy of an iid output sequence.

    Returns the Legendre-transform rate ``r`` with
    ``Pr{-(1/n) ln q(Y^n) <= H - delta} <= exp(-n r)`` for ``side='left'``
    and the mirror statement ``>= H + delta`` for ``side='right'``.
    ``inf`` means the event is empty.
    """
    from .solve import invert_delta
    if not isinstance(dist, OutputDist) or not dist.is_discrete:
        raise OutOfRange("entropy tails need a discrete output law")
    if side not in ("left", "right"):
        raise OutOfRange("side must be 'left' or 'right'")
    if delta < 0:
        raise OutOfRange("delta must be nonnegative")
    q = np.asarray(dist.probs)
    q = q[q > 0]
    x = -np.log(q)
    v = -x if side == "left" else x
    atoms = _atomset([(v, np.log(q))], [1.0], +1, None, "entropy")
    if not atoms.raw(0.0)[2] > _VAR_FLOOR:
        raise DegenerateVariance("output law has constant self-information")
    if delta == 0:
        return 0.0
    top = atoms.max_deviation
    if delta > top * (1 + 1e-12):
        return math.inf
    if delta >= top * (1 - 1e-12):
        return float(-math.log(q[v >= v.max() - 1e-12].sum()))
    # the tilt scale is set by the spread of the self-information values
    spread = float(v.max() - v.min())
    cfg = cfg.with_(lambda_max=cfg.lambda_max * max(1.0, 1.0 / spread))
    if delta <= delta_cap(atoms, cfg):
        lam = invert_delta(atoms, delta, cfg).value
    else:
        # any tilt gives a valid Chernoff exponent; take the largest one
        lam = cfg.lambda_max
    cgf = atoms.raw(lam)[0]
    return float(max(lam * (atoms.mean0 + delta) - cgf, 0.0))


# -------------------------------------------------------------------- zeta

def zeta(ch):
    """Skewness coefficient ``-m3 / (6 sigma^6)`` of ``-ln p(X|Y)``."""
    m = bimsc_tilt(ch, 0.0)
    return -m.m3 / (6.0 * m.sigma2 ** 3)


def zeta_closed_form(ch):
    """Closed-form skewness coefficient for BSC and BEC.

    Both are two-point laws: ``-ln(1-p)`` vs ``-ln p`` for the BSC and
    ``0`` vs ``ln 2`` for the BEC, each with the upper atom at mass ``p``.
    """
    p = ch.param
    if ch.kind == "bsc":
        span = math.log((1.0 - p) / p)
    elif ch.kind == "bec":
        span = LN2
    else:
        raise NotSymmetric("closed form available for BSC and BEC only")
    return -(1.0 - 2.0 * p) / (6.0 * p * p * (1.0 - p) ** 2 * span ** 3)

