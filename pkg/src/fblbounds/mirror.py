"""Upper bounds on the probability of the outer mirror image of a jar.

The set in question collects the output sequences for which some input
sequence (of the relevant type) has an information density at or below
the jar threshold.  Its probability ``P(B)`` enters the NEP formula and
the converse bounds as ``ln P(B) / n``.

Methods
-------
trivial
    ``P(B) <= 1``; valid for every channel.
bec-exact
    For the BEC the set probability equals the conditional tail, which is
    represented by ``g``; this makes the NEP and SO formulas coincide.
z-entropy-tail
    For the Z channel the set is ``{#zeros/n <= q_t(0) - delta'}`` with
    ``delta' = delta / ln(q_t(1) / (p t(0)))``; its probability is bounded
    by a Chernoff exponent (no polynomial prefactor), computed from the
    empirical-entropy tail when ``q_t(0) != 1/2`` and from the count
    directly otherwise.
"""

import math
from dataclasses import dataclass

from .channels import InputDist, output_marginal
from .config import DEFAULT
from .errors import OutOfRange
from .tilted import entropy_tail_rate, g_eval

METHODS = ("auto", "trivial")


@dataclass(frozen=True)
class MirrorBound:
    """Upper bound on ``ln P(B)`` and the method that produced it."""

    log_prob: float
    method: str


def binary_kl(a, b):
    """``D(a || b)`` between Bernoulli laws, in nats."""
    out = 0.0
    if a > 0:
        out += a * math.log(a / b)
    if a < 1:
        out += (1 - a) * math.log((1 - a) / (1 - b))
    return out


def z_threshold(p, t0, delta):
    """Zero-fraction threshold ``q_t(0) - delta'`` and the entropy deviation."""
    q0 = t0 * (1.0 - p)
    q1 = 1.0 - q0
    dprime = delta / math.log(q1 / (p * t0))
    return q0, dprime, dprime * abs(math.log((1.0 - q0) / q0))


def _z_log_prob(ch, t, n, delta, cfg):
    p, t0 = ch.param, t.t0
    q0, dprime, dev = z_threshold(p, t0, delta)
    if q0 - dprime < 0:
        return -math.inf
    if abs(q0 - 0.5) < 1e-15:
        return -n * binary_kl(q0 - dprime, q0)
    side = "left" if q0 < 0.5 else "right"
    rate = entropy_tail_rate(output_marginal(ch, t), dev, side, cfg)
    return -n * rate


def p_outer_jar(ch, t, n, delta, method="auto", cfg=DEFAULT):
    """Upper bound on ``ln P(B)`` at block length ``n`` and deviation ``delta``.

    Parameters
    ----------
    ch : Channel
    t : InputDist or None
        Input type; ignored for symmetric channels.
    method : {'auto', 'trivial'}
        ``auto`` picks ``bec-exact`` for the BEC, ``z-entropy-tail`` for the
        Z channel and ``trivial`` otherwise.
    """
    if method not in METHODS:
        raise OutOfRange(f"unknown mirror method {method!r}")
    if delta < 0:
        raise OutOfRange("delta must be nonnegative")
    if method == "trivial" or ch.kind not in ("bec", "z"):
        return MirrorBound(0.0, "trivial")
    if ch.kind == "bec":
        return MirrorBound(math.log(g_eval(ch, None, n, delta, cfg)), "bec-exact")
    if t is None:
        raise OutOfRange("the Z-channel bound needs an input type")
    if not isinstance(t, InputDist):
        t = InputDist(t)
    return MirrorBound(min(_z_log_prob(ch, t, n, delta, cfg), 0.0), "z-entropy-tail")
