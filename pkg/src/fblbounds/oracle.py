"""Exact small-instance computations that anchor the analytic machinery.

Everything here is brute force or exact counting: binomial tails for the
BSC and BEC, convolution of per-symbol information-density laws for a
fixed input sequence, and enumeration of output sequences for the
mirror-set probability.  The binomial routines are also reused at large
``n`` by the exact-tail variant of the converse.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .channels import InputDist, output_marginal
from .errors import DegenerateVariance, OutOfRange, TooLarge, Unsupported
from .tilted import atoms_for

MERGE_TOL = 1e-14
_MAX_SEQ = 5_000_000


@dataclass(frozen=True)
class TailResult:
    prob: float
    terms: int


def _bimsc_lattice(ch):
    """Per-symbol values (low, high) of -ln p(X|Y) and the mass of the high one."""
    p = ch.param
    if ch.kind == "bsc":
        return -math.log1p(-p), -math.log(p), p
    if ch.kind == "bec":
        return 0.0, math.log(2.0), p
    raise Unsupported("exact BIMSC tails exist for the BSC and BEC only")


def bimsc_log_tail(ch, n, delta):
    """``ln Pr{-(1/n) ln p(X^n|Y^n) > H + delta}`` for the BSC or BEC, any ``n``."""
    a, b, p = _bimsc_lattice(ch)
    H = (1 - p) * a + p * b
    k = np.arange(n + 1)
    stat = (n - k) * a + k * b
    hit = stat > n * (H + delta)
    if not hit.any():
        return -math.inf, 0
    return float(logsumexp(binom.logpmf(k[hit], n, p))), int(hit.sum())


def _bimsc_tail(ch, n, delta):
    lp, terms = bimsc_log_tail(ch, n, delta)
    return math.exp(lp), terms


def exact_tail_bimsc(ch, n, delta):
    """``Pr{-(1/n) ln p(X^n|Y^n) > H(X|Y) + delta}`` by exact counting (n <= 30)."""
    if n > 30:
        raise TooLarge("exact BIMSC tails are limited to n <= 30")
    prob, terms = _bimsc_tail(ch, n, delta)
    return TailResult(prob, terms)


def _symbol_law(ch, t, x):
    """Atoms ``(values, probs)`` of ln(p(Y|x)/q_t(Y)) given X = x."""
    q = output_marginal(ch, t).probs
    row = ch.matrix[x]
    nz = row > 0
    return np.log(row[nz]) - np.log(q[nz]), row[nz]


def _merge(v, w):
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    keep_v, keep_w = [v[0]], [w[0]]
    for vi, wi in zip(v[1:], w[1:]):
        if vi - keep_v[-1] <= MERGE_TOL * max(1.0, abs(vi)):
            keep_w[-1] += wi
        else:
            keep_v.append(vi)
            keep_w.append(wi)
    return np.array(keep_v), np.array(keep_w)


def _check_type(t, n):
    counts = np.asarray(t.probs) * n
    r = np.rint(counts)
    if np.max(np.abs(counts - r)) > 1e-9:
        raise OutOfRange("t * n must be integral")
    return r.astype(int)


def _default_sequence(counts):
    return np.repeat(np.arange(len(counts)), counts)


def exact_tail_dimc(ch, t, n, delta, xseq=None):
    """``Pr{(1/n) ln p(Y^n|x^n)/q_t(Y^n) <= I(t;P) - delta | X^n = x^n}``.

    The law of the sum is built by convolving the per-position laws and
    merging atoms closer than `MERGE_TOL` (relative).  ``xseq`` defaults to
    the sorted sequence of type ``t``.
    """
    if not ch.is_discrete:
        raise Unsupported("exact DIMC tails need a discrete channel")
    if n > 14:
        raise TooLarge("exact DIMC tails are limited to n <= 14")
    t = t if isinstance(t, InputDist) else InputDist(t)
    counts = _check_type(t, n)
    xs = _default_sequence(counts) if xseq is None else np.asarray(xseq)
    if len(xs) != n or np.any(np.bincount(xs, minlength=ch.n_inputs) != counts):
        raise OutOfRange("x sequence does not have type t")
    laws = {x: _symbol_law(ch, t, x) for x in set(xs.tolist())}
    if all(laws[x][0].size == 1 for x in laws):
        raise DegenerateVariance("the information density is deterministic for this sequence")
    info = float(sum(t.probs[x] * (laws[x][1] @ laws[x][0]) for x in laws))
    v, w = np.array([0.0]), np.array([1.0])
    for x in xs:
        sv, sw = laws[int(x)]
        v, w = _merge((v[:, None] + sv[None, :]).ravel(), (w[:, None] * sw[None, :]).ravel())
    thr = n * (info - delta)
    hit = v <= thr + MERGE_TOL * max(1.0, abs(thr))
    return TailResult(float(w[hit].sum()), int(v.size))


def _all_sequences(k, n):
    if k ** n > _MAX_SEQ:
        raise TooLarge(f"{k}^{n} output sequences exceed the enumeration limit")
    return np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64).reshape(-1, n)


def exact_mirror(ch, t, n, delta):
    """Exact ``P(B)`` by enumerating every output sequence.

    With ``t=None`` (symmetric channels) the union runs over all input
    sequences and Y is drawn from the uniform-input output law; otherwise
    over the type class of ``t`` with Y drawn iid from ``q_t``.
    """
    if not ch.is_discrete:
        raise Unsupported("exact mirror probabilities need a discrete channel")
    if n > 14:
        raise TooLarge("exact mirror probabilities are limited to n <= 14")
    W = np.asarray(ch.matrix)
    ys = _all_sequences(W.shape[1], n)
    with np.errstate(divide="ignore"):
        if t is None:
            q = W.mean(axis=0)
            post = W / (W.shape[0] * np.where(q > 0, q, 1.0))
            # largest finite -ln p(x|y) per output symbol
            c = np.array([(-np.log(post[:, y][post[:, y] > 0])).max() if q[y] > 0 else -np.inf
                          for y in range(W.shape[1])])
            H = float(atoms_for(ch, None).info)
            stat = c[ys].sum(axis=1)
            inside = np.isfinite(stat) & (stat > n * (H + delta))
        else:
            t = t if isinstance(t, InputDist) else InputDist(t)
            if ch.n_inputs != 2:
                raise Unsupported("type-class enumeration implemented for binary inputs")
            m = _check_type(t, n)[0]
            q = output_marginal(ch, t).probs
            lw = np.log(W)
            c0, c1 = lw[0][ys], lw[1][ys]
            key = np.where(np.isneginf(c1), -np.inf, np.where(np.isneginf(c0), np.inf, c0 - c1))
            order = np.argsort(key, axis=1, kind="stable")
            chosen = np.zeros_like(key, dtype=bool)
            np.put_along_axis(chosen, order[:, :m], True, axis=1)
            cost = np.where(chosen, c0, c1)
            total = cost.sum(axis=1)
            info = float(atoms_for(ch, t).info)
            thr = n * (info - delta) + np.log(q)[ys].sum(axis=1)
            inside = np.isfinite(total) & (total <= thr + 1e-12)
    qy = q[ys].prod(axis=1)
    return TailResult(float(qy[inside].sum()), int(ys.shape[0]))


# --------------------------------------------- exact-tail converse solution

def _largest_k(n, p, target):
    """Largest k with ``Pr{Bin(n,p) >= k} >= target``."""
    k = np.arange(n + 1)
    sf = binom.sf(k - 1, n, p)
    ok = np.flatnonzero(sf >= target)
    return int(ok[-1])


def exact_converse_delta(ch, n, eps, error_model, t=None):
    """Largest deviation with ``mult * eps`` not exceeding the exact tail.

    Supported for the BSC and BEC (entropy statistic) and for the Z channel
    (information density at the type nearest ``t``).  Returns
    ``(delta, type_used)`` where ``type_used`` is None for symmetric
    channels.
    """
    s = math.sqrt(-2.0 * math.log(eps) / n)
    k_mult = 2.0 if error_model == "avg" else 1.0
    if ch.kind in ("bsc", "bec"):
        atoms = atoms_for(ch, None)
        sigma = math.sqrt(atoms.raw(0.0)[2])
        target = (1.0 + k_mult * s / sigma) * eps
        a, b, p = _bimsc_lattice(ch)
        H = (1 - p) * a + p * b
        k = _largest_k(n, p, target)
        return float(((n - k) * a + k * b) / n - H), None
    if ch.kind == "z":
        target = (1.0 + k_mult * s) * eps
        p = ch.param
        m = int(round(t.t0 * n))
        if not 0 < m < n:
            raise OutOfRange("rounded type is degenerate")
        tt = InputDist.binary(m / n)
        t0 = m / n
        q1 = 1.0 - t0 * (1.0 - p)
        info = float(atoms_for(ch, tt).info)
        k = _largest_k(m, p, target)
        total = (m - k) * math.log(1.0 / t0) + k * math.log(p / q1) + (n - m) * math.log(1.0 / q1)
        return float(info - total / n), tt
    raise Unsupported("exact tails are available for the BSC, BEC and Z channel")
