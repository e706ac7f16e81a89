"""Channel models, input/output distributions, mutual information, capacity.

Four named families are supported with closed-form shortcuts (BSC, BEC,
Z, and the binary-input AWGN channel ``biagc``), plus arbitrary
discrete-output channels given as a row-stochastic matrix.  All
information quantities are in nats.

The AWGN channel maps input 0 to +1 and input 1 to -1 and adds Gaussian
noise of variance ``10**(-snr_db/10)``.  Integrals against its output
densities use Gauss-Hermite quadrature; the node count starts at
``SolverConfig.gh_nodes`` and is doubled until the rule and its doubled
rule agree to ``SolverConfig.quad_tol`` on the log-likelihood moments.
"""

import json
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

import numpy as np
from scipy.special import roots_hermite, xlogy

from .config import DEFAULT
from .errors import DimensionMismatch, NotConverged, OutOfRange, Unsupported

KINDS = ("bsc", "bec", "z", "biagc", "matrix")
LN2 = math.log(2.0)
_MAX_GH_NODES = 8192


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Channel:
    """A memoryless channel with a finite input alphabet.

    Discrete channels carry ``matrix`` (rows indexed by input).  The AWGN
    channel carries ``sigma2`` and a normalized quadrature rule
    (``nodes``, ``qweights``) for a standard Gaussian.
    """

    kind: str
    param: float | None
    inputs: tuple
    outputs: tuple | None = None
    matrix: np.ndarray | None = None
    sigma2: float | None = None
    nodes: np.ndarray | None = None
    qweights: np.ndarray | None = None
    quad_agreement: float | None = None

    @property
    def n_inputs(self):
        return len(self.inputs)

    @property
    def is_discrete(self):
        return self.matrix is not None

    @property
    def is_bimsc(self):
        """Binary-input symmetric channel with uniform optimal input."""
        return self.kind in ("bsc", "bec", "biagc")

    @property
    def means(self):
        """Modulated input levels of the AWGN channel."""
        return np.array([1.0, -1.0])

    def label(self):
        if self.kind == "biagc":
            return f"biagc({self.param:g} dB)"
        if self.kind == "matrix":
            return f"matrix({self.n_inputs}x{len(self.outputs)})"
        return f"{self.kind}({self.param:g})"


@dataclass(frozen=True, eq=False)
class InputDist:
    """Probability vector over a channel's input alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DimensionMismatch("input distribution must be a nonempty vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise OutOfRange("input distribution must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def binary(cls, t0):
        """Binary input law with mass ``t0`` on input 0."""
        if not 0.0 <= t0 <= 1.0:
            raise OutOfRange("t0 must lie in [0, 1]")
        return cls(np.array([t0, 1.0 - t0]))

    @classmethod
    def uniform(cls, k):
        return cls(np.full(k, 1.0 / k))

    @property
    def t0(self):
        return float(self.probs[0])


@dataclass(frozen=True, eq=False)
class OutputDist:
    """Output marginal: a probability vector, or a Gaussian mixture."""

    probs: np.ndarray | None = None
    mix_weights: np.ndarray | None = None
    mix_means: np.ndarray | None = None
    sigma2: float | None = None
    _nodes: np.ndarray | None = None
    _qweights: np.ndarray | None = None

    @property
    def is_discrete(self):
        return self.probs is not None

    def total(self):
        """Total mass; quadrature-based for the mixture form."""
        if self.is_discrete:
            return float(self.probs.sum())
        # each mixture component is integrated by its own normalized rule
        return float(np.sum(self.mix_weights) * np.sum(self._qweights))

    def density(self, y):
        return np.exp(self.log_density(y))

    def log_density(self, y):
        y = np.asarray(y, dtype=float)
        comps = [math.log(w) - (y - mu) ** 2 / (2 * self.sigma2)
                 for w, mu in zip(self.mix_weights, self.mix_means) if w > 0]
        return np.logaddexp.reduce(np.array(comps), axis=0) - 0.5 * math.log(2 * math.pi * self.sigma2)


def gauss_hermite_rule(n_nodes):
    """Nodes and weights for expectations under a standard normal."""
    x, w = roots_hermite(n_nodes)
    keep = w > 0  # far-tail weights underflow in large rules
    return math.sqrt(2.0) * x[keep], w[keep] / math.sqrt(math.pi)


def _llr_check_vector(sigma2, z, w):
    """Moments of -ln p(X|Y) used to validate a quadrature rule."""
    y = 1.0 + math.sqrt(sigma2) * z
    L = np.logaddexp(0.0, -2.0 * y / sigma2)
    out = []
    for lam in (0.0, 1.0):
        a = np.log(w) + lam * L
        a -= a.max()
        p = np.exp(a)
        p /= p.sum()
        m = p @ L
        d = L - m
        out += [m, p @ d ** 2, p @ d ** 3]
    return np.array(out)


def _awgn_rule(sigma2, cfg):
    n = cfg.gh_nodes
    z, w = gauss_hermite_rule(n)
    cur = _llr_check_vector(sigma2, z, w)
    while True:
        z2, w2 = gauss_hermite_rule(2 * n)
        nxt = _llr_check_vector(sigma2, z2, w2)
        diff = float(np.max(np.abs(nxt - cur)))
        if diff <= cfg.quad_tol:
            return z, w, diff
        if 2 * n >= _MAX_GH_NODES:
            raise NotConverged(
                f"quadrature did not reach {cfg.quad_tol:g} with {2 * n} nodes")
        n, z, w, cur = 2 * n, z2, w2, nxt


def _check_rows(m, tol):
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise DimensionMismatch("transition matrix must be at least 2x2")
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise OutOfRange("transition matrix has negative or non-finite entries")
    dev = np.abs(m.sum(axis=1) - 1.0)
    if np.any(dev > tol):
        raise OutOfRange(f"row sums deviate from 1 by up to {dev.max():.3g}")
    return m / m.sum(axis=1, keepdims=True)


def make_channel(kind, params, cfg=DEFAULT):
    """Build a channel.

    Parameters
    ----------
    kind : str
        One of ``bsc``, ``bec``, ``z``, ``biagc``, ``matrix``.
    params : sequence
        ``[p]`` for BSC/BEC/Z (Z uses p = Pr{Y=1|X=0}), ``[snr_db]`` for
        ``biagc``, or the row-stochastic matrix itself for ``matrix``.
    cfg : SolverConfig
        Supplies the quadrature settings for ``biagc``.
    """
    kind = str(kind).lower()
    if kind not in KINDS:
        raise Unsupported(f"unknown channel kind {kind!r}")
    if kind == "matrix":
        m = _check_rows(np.array(params, dtype=float), 1e-9)
        k, j = m.shape
        return Channel("matrix", None, tuple(range(k)), tuple(range(j)), _frozen(m))
    if len(params) != 1:
        raise DimensionMismatch(f"{kind} takes exactly one parameter")
    v = float(params[0])
    if kind == "biagc":
        # the linear SNR 10**(v/10) is positive for every finite dB value
        if not math.isfinite(v):
            raise OutOfRange("snr_db must be finite")
        s2 = 10.0 ** (-v / 10.0)
        z, w, agree = _awgn_rule(s2, cfg)
        return Channel("biagc", v, (0, 1), None, None, s2, _frozen(z), _frozen(w), agree)
    if not 0.0 < v < 1.0:
        raise OutOfRange(f"{kind} parameter must lie strictly inside (0, 1)")
    if kind == "bsc":
        m = [[1 - v, v], [v, 1 - v]]
        outs = (0, 1)
    elif kind == "bec":
        m = [[1 - v, 0.0, v], [0.0, 1 - v, v]]
        outs = (0, 1, "e")
    else:
        m = [[1 - v, v], [0.0, 1.0]]
        outs = (0, 1)
    return Channel(kind, v, (0, 1), outs, _frozen(m))


def _to_float(x, what):
    try:
        return float(Decimal(str(x)))
    except (InvalidOperation, ValueError) as exc:
        raise OutOfRange(f"cannot parse {what} value {x!r}") from exc


def channel_from_spec(spec, cfg=DEFAULT):
    """Build a channel from a parsed channel-spec mapping.

    Probabilities may be given as decimal strings; matrix rows are checked
    exactly in decimal arithmetic before conversion.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise OutOfRange("channel spec must be an object with a 'kind' field")
    kind = str(spec["kind"]).lower()
    if kind == "matrix":
        rows = spec.get("matrix")
        if not rows:
            raise OutOfRange("matrix channel needs a 'matrix' field")
        for r in rows:
            s = sum(Decimal(str(x)) for x in r)
            if abs(s - 1) > Decimal("1e-9"):
                raise OutOfRange(f"matrix row sums to {s}, not 1")
        m = [[_to_float(x, "matrix") for x in r] for r in rows]
        return make_channel("matrix", m, cfg)
    if kind == "biagc":
        if "snr_db" not in spec:
            raise OutOfRange("biagc channel needs 'snr_db'")
        return make_channel(kind, [_to_float(spec["snr_db"], "snr_db")], cfg)
    if "p" not in spec:
        raise OutOfRange(f"{kind} channel needs 'p'")
    return make_channel(kind, [_to_float(spec["p"], "p")], cfg)


def load_channel(path, cfg=DEFAULT):
    """Read a channel-spec JSON file."""
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh, parse_float=Decimal)
    return channel_from_spec(spec, cfg)


def _as_input(ch, t):
    if t is None:
        return InputDist.uniform(ch.n_inputs)
    if not isinstance(t, InputDist):
        t = InputDist(np.asarray(t, dtype=float))
    if t.probs.size != ch.n_inputs:
        raise DimensionMismatch(
            f"input law has {t.probs.size} entries, channel has {ch.n_inputs} inputs")
    return t


def output_marginal(ch, t):
    """Output law ``q_t(y) = sum_x t(x) p(y|x)``."""
    t = _as_input(ch, t)
    if ch.is_discrete:
        return OutputDist(probs=_frozen(t.probs @ ch.matrix))
    return OutputDist(mix_weights=t.probs, mix_means=ch.means, sigma2=ch.sigma2,
                      _nodes=ch.nodes, _qweights=ch.qweights)


def awgn_conditional_atoms(ch, t, x):
    """Quadrature nodes for Y given X=x with ``ln p(y|x)`` and ``ln q_t(y)``."""
    s2 = ch.sigma2
    mu = ch.means[x]
    y = mu + math.sqrt(s2) * ch.nodes
    logp = -(y - mu) ** 2 / (2 * s2) - 0.5 * math.log(2 * math.pi * s2)
    logq = output_marginal(ch, t).log_density(y)
    return ch.qweights, logp, logq


def mutual_information(ch, t):
    """I(t;P) in nats."""
    t = _as_input(ch, t)
    if ch.is_discrete:
        q = t.probs @ ch.matrix
        total = 0.0
        for x, tx in enumerate(t.probs):
            if tx == 0:
                continue
            row = ch.matrix[x]
            nz = row > 0
            total += tx * float(np.sum(row[nz] * (np.log(row[nz]) - np.log(q[nz]))))
        return max(total, 0.0)
    total = 0.0
    for x, tx in enumerate(t.probs):
        if tx == 0:
            continue
        w, logp, logq = awgn_conditional_atoms(ch, t, x)
        total += tx * float(w @ (logp - logq))
    return max(total, 0.0)


def binary_entropy(p):
    """H_b(p) in nats."""
    return float(-xlogy(p, p) - xlogy(1 - p, 1 - p))


def z_capacity_input(p):
    """Capacity-achieving Pr{X=0} of the Z channel."""
    a = p ** (-p / (1.0 - p))
    return 1.0 / (1.0 - p + a)


def z_capacity_output(p):
    """Output law at the capacity-achieving input of the Z channel."""
    a = p ** (-p / (1.0 - p))
    d = 1.0 - p + a
    return np.array([(1.0 - p) / d, a / d])


def awgn_conditional_entropy(ch):
    """H(X|Y) for the AWGN channel under uniform input."""
    y = 1.0 + math.sqrt(ch.sigma2) * ch.nodes
    return float(ch.qweights @ np.logaddexp(0.0, -2.0 * y / ch.sigma2))


def capacity(ch):
    """Closed-form capacity in nats for the named families."""
    p = ch.param
    if ch.kind == "bsc":
        return LN2 - binary_entropy(p)
    if ch.kind == "bec":
        return (1.0 - p) * LN2
    if ch.kind == "z":
        return math.log1p((1.0 - p) * p ** (p / (1.0 - p)))
    if ch.kind == "biagc":
        return LN2 - awgn_conditional_entropy(ch)
    raise Unsupported("no closed-form capacity for a generic matrix channel; "
                      "use solve.capacity_generic")


def capacity_input(ch):
    """Capacity-achieving input law for the named families."""
    if ch.is_bimsc:
        return InputDist.uniform(2)
    if ch.kind == "z":
        return InputDist.binary(z_capacity_input(ch.param))
    raise Unsupported("use solve.capacity_generic for a generic matrix channel")
