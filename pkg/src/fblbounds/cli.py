"""Command-line front end.

Subcommands
-----------
capacity   capacity of a channel
tilt       tilted moments at one tilt
delta      solve g_n(delta) = eps
bound      named bounds at a single block length
curve      named bounds over a block-length grid (CSV or JSON)
tstar      t*(0) against the capacity-achieving t(0) for Z channels
verify     run the exact-enumeration checks

Channels are given with ``--channel``, either a JSON channel-spec file or
an inline ``kind:param`` such as ``bsc:0.11`` or ``biagc:9.63``.

Exit codes: 0 success, 2 precondition failure, 3 numerical failure.  On
failure a JSON object ``{"error": ..., "code": ..., "message": ...}`` is
written to stderr.  Failures at single grid points do not abort a curve;
the row is emitted with its error code in the ``status`` column.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds as B
from .channels import (LN2, InputDist, capacity_input, load_channel, make_channel,
                       z_capacity_input)
from .config import DEFAULT
from .errors import FBLError, NumericalError, OutOfRange, PreconditionError, Unsupported
from .solve import optimize_t_star, so_objective, solve_delta_n
from .tilted import atoms_for, delta_cap, g_eval, moments_at, zeta

COLUMNS = ("n", "eps", "bound", "rate_bits", "rate_nats", "status", "t0")
TSTAR_COLUMNS = ("p", "tstar0", "tcap0", "ratio_cap", "ratio_star", "ratio_uniform")
EXTRA_NAMES = ("TStar", "TCap")


def fmt(x):
    """Fixed 12-significant-digit rendering used in every output file."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


# ------------------------------------------------------------- eps specs

@dataclass(frozen=True)
class EpsilonSpec:
    """How the target error probability depends on the block length.

    ``fixed_eps``: constant; ``fixed_delta``: ``eps = g_n(value)``;
    ``poly``: ``n^-a / (2 sqrt(pi a ln n)) (1 - 1/(2 a ln n))``;
    ``subexp``: ``e^(-n^a) / (2 sqrt(pi n^a)) (1 - 1/(2 n^a))``.
    """

    mode: str
    value: float

    def __post_init__(self):
        v = self.value
        if self.mode == "fixed_eps" and not 0 < v < 1:
            raise OutOfRange("fixed eps must lie in (0, 1)")
        if self.mode == "fixed_delta" and not v > 0:
            raise OutOfRange("fixed delta must be positive")
        if self.mode == "poly" and not v > 0:
            raise OutOfRange("poly exponent must be positive")
        if self.mode == "subexp" and not 0 < v < 1:
            raise OutOfRange("subexp exponent must lie in (0, 1)")
        if self.mode not in ("fixed_eps", "fixed_delta", "poly", "subexp"):
            raise OutOfRange(f"unknown eps mode {self.mode!r}")

    def eps_for(self, ch, n, c=None, cfg=DEFAULT):
        """Target error probability at block length ``n``.

        For ``fixed_delta`` on a non-symmetric channel the type and the
        target depend on each other; a few fixed-point passes settle it.
        """
        a = self.value
        if self.mode == "fixed_eps":
            return a
        if self.mode == "poly":
            ln = math.log(n)
            return n ** -a / (2.0 * math.sqrt(math.pi * a * ln)) * (1.0 - 1.0 / (2.0 * a * ln))
        if self.mode == "subexp":
            na = n ** a
            return math.exp(-na) / (2.0 * math.sqrt(math.pi * na)) * (1.0 - 1.0 / (2.0 * na))
        if ch.is_bimsc:
            return g_eval(ch, None, n, a, cfg)
        t = InputDist.uniform(ch.n_inputs)
        eps = g_eval(ch, t, n, a, cfg)
        for _ in range(8):
            t_new = optimize_t_star(ch, n, eps, c, cfg)[0]
            eps_new = g_eval(ch, t_new, n, a, cfg)
            done = abs(eps_new - eps) <= 1e-12 * eps
            t, eps = t_new, eps_new
            if done:
                break
        return eps


def parse_eps(args):
    picks = [(m, v) for m, v in (("fixed_eps", args.eps), ("fixed_delta", args.delta),
                                 ("poly", args.poly), ("subexp", args.subexp)) if v is not None]
    if len(picks) != 1:
        raise OutOfRange("give exactly one of --eps, --delta, --poly, --subexp")
    return EpsilonSpec(*picks[0])


# ------------------------------------------------------------ parsing

def parse_channel(text, cfg=DEFAULT):
    """A channel from a spec file path or an inline ``kind:param``."""
    if os.path.exists(text):
        return load_channel(text, cfg)
    if ":" not in text:
        raise OutOfRange(f"{text!r} is neither a file nor kind:param")
    kind, _, par = text.partition(":")
    try:
        v = float(par)
    except ValueError as exc:
        raise OutOfRange(f"bad channel parameter {par!r}") from exc
    return make_channel(kind, [v], cfg)


def parse_range(text, integer=True):
    """``LO:HI:STEP`` (inclusive) or a single value."""
    parts = text.split(":")
    conv = int if integer else float
    try:
        vals = [conv(p) for p in parts]
    except ValueError as exc:
        raise OutOfRange(f"bad range {text!r}") from exc
    if len(vals) == 1:
        return [vals[0]]
    if len(vals) != 3 or vals[2] <= 0 or vals[1] < vals[0]:
        raise OutOfRange(f"range must be LO:HI:STEP with STEP > 0, got {text!r}")
    lo, hi, step = vals
    if integer:
        return list(range(lo, hi + 1, step))
    k = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(k + 1)]


def make_config(args):
    kw = {}
    if getattr(args, "tol", None) is not None:
        kw["rel_tol"] = args.tol
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "c_be", None) is not None:
        kw["c_be"] = args.c_be
    return DEFAULT.with_(**kw) if kw else DEFAULT


def c_value(ch, frac):
    if frac is None:
        return None
    if not 0 < frac < 1:
        raise OutOfRange("--c-frac must lie in (0, 1)")
    return frac * B.capacity_of(ch)


def resolve_names(names, error_model):
    out = []
    for name in names:
        name = name.strip()
        if name == "Exact":
            name = "ExactConverseAvg" if error_model == "avg" else "ExactConverseMax"
        if name not in B.NAMES + EXTRA_NAMES:
            raise OutOfRange(f"unknown bound {name!r}")
        out.append(name)
    return out


# ------------------------------------------------------------- rows

@dataclass(frozen=True)
class CurveRow:
    n: int
    eps: float
    bound: str
    rate_nats: float | None
    status: str = "ok"
    t0: float | None = None

    @property
    def rate_bits(self):
        return None if self.rate_nats is None else self.rate_nats / LN2

    def as_list(self):
        return [str(self.n), fmt(self.eps), self.bound, fmt(self.rate_bits),
                fmt(self.rate_nats), self.status, fmt(self.t0)]


def _tstar_rows(ch, n, eps, c, cfg):
    if ch.kind != "z":
        raise Unsupported("TStar/TCap rows are produced for the Z channel")
    t, v = optimize_t_star(ch, n, eps, c, cfg)
    tc = InputDist.binary(z_capacity_input(ch.param))
    vc = so_objective(ch, tc, n, eps, cfg)
    return {"TStar": (v, t.t0), "TCap": (vc, tc.t0)}


def compute_point(task):
    """Evaluate every requested bound at one block length.

    Returns a list of `CurveRow`; failures become rows with a status code.
    """
    ch, n, spec, names, c, cfg, opts = task
    try:
        eps = spec.eps_for(ch, n, c, cfg)
    except FBLError as exc:
        return [CurveRow(n, float("nan"), name, None, exc.code) for name in names]
    rows = []
    extra = None
    for name in names:
        try:
            if name in EXTRA_NAMES:
                if extra is None:
                    extra = _tstar_rows(ch, n, eps, c, cfg)
                v, t0 = extra[name]
                rows.append(CurveRow(n, eps, name, v, "ok", t0))
                continue
            rb = B.compute(name, ch, n, eps, c, cfg, tail=opts["tail"], strict=opts["strict"])
            rows.append(CurveRow(n, eps, name, float(rb.rate_nats), "ok", rb.meta.get("t0")))
        except FBLError as exc:
            rows.append(CurveRow(n, eps, name, None, exc.code))
    return rows


def run_grid(ch, ns, spec, names, c=None, cfg=DEFAULT, jobs=1, tail="auto", strict=False):
    """All rows for a block-length grid, in grid order."""
    opts = {"tail": tail, "strict": strict}
    tasks = [(ch, n, spec, names, c, cfg, opts) for n in ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(compute_point, tasks))
    else:
        chunks = [compute_point(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def render_csv(rows, columns=COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(r.as_list() if isinstance(r, CurveRow) else r)
    return buf.getvalue()


def render_json(rows, header, columns=COLUMNS):
    body = [dict(zip(columns, r.as_list() if isinstance(r, CurveRow) else r)) for r in rows]
    return json.dumps({"meta": header, "rows": body}, indent=1, sort_keys=True) + "\n"


def write_output(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_curve(path):
    """Load a CSV curve and re-check each row's invariants.

    Returns the rows as dicts with numeric fields converted.  Raises
    OutOfRange when a row is inconsistent.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise OutOfRange("unexpected columns")
        rows = []
        for r in reader:
            d = dict(r, n=int(r["n"]), eps=float(r["eps"]))
            if r["status"] == "ok":
                d["rate_bits"], d["rate_nats"] = float(r["rate_bits"]), float(r["rate_nats"])
                # both columns carry 12 significant digits
                if abs(d["rate_bits"] * LN2 - d["rate_nats"]) > 1e-11 * max(abs(d["rate_nats"]), 1e-300):
                    raise OutOfRange(f"bits and nats disagree in row {r}")
            elif r["rate_nats"] or r["rate_bits"]:
                raise OutOfRange(f"failed row carries a rate: {r}")
            rows.append(d)
    return rows


def run_curve(channel, names, ns, spec, out=None, fmt_="csv", c=None, cfg=DEFAULT,
              jobs=1, tail="auto", strict=False):
    """Compute a curve table and write it; returns the exit code."""
    rows = run_grid(channel, ns, spec, names, c, cfg, jobs, tail, strict)
    if fmt_ == "json":
        header = {"channel": channel.label(), "eps_mode": spec.mode, "eps_value": fmt(spec.value),
                  "tail": tail, "strict": strict}
        text = render_json(rows, header)
    else:
        text = render_csv(rows)
    write_output(text, out)
    return 0


def tstar_sweep(ps, n, eps, c_frac=None, cfg=DEFAULT):
    """Rows ``(p, t*(0), t_cap(0), ratio_cap, ratio_star, ratio_uniform)``.

    Ratios are objective values ``I(t) - delta_{t,n}(eps)`` divided by the
    value at ``t*``.
    """
    rows = []
    for p in ps:
        ch = make_channel("z", [p], cfg)
        c = None if c_frac is None else c_frac * B.capacity_of(ch)
        t, v = optimize_t_star(ch, n, eps, c, cfg)
        tc = z_capacity_input(p)
        vc = so_objective(ch, InputDist.binary(tc), n, eps, cfg)
        vu = so_objective(ch, InputDist.uniform(2), n, eps, cfg)
        rows.append((p, t.t0, tc, vc / v, v / v, vu / v))
    return rows


def run_tstar_sweep(ps, n, eps, out=None, fmt_="csv", c_frac=None, cfg=DEFAULT):
    rows = [[fmt(x) for x in r] for r in tstar_sweep(ps, n, eps, c_frac, cfg)]
    if fmt_ == "json":
        text = render_json(rows, {"channel": "z", "n": n, "eps": fmt(eps)}, TSTAR_COLUMNS)
    else:
        text = render_csv(rows, TSTAR_COLUMNS)
    write_output(text, out)
    return 0


# ---------------------------------------------------------- subcommands

def _json_out(obj):
    sys.stdout.write(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def cmd_capacity(args):
    cfg = make_config(args)
    ch = parse_channel(args.channel, cfg)
    cap = B.capacity_of(ch)
    if ch.kind == "matrix":
        from .solve import capacity_generic
        t = capacity_generic(ch)[1]
    else:
        t = capacity_input(ch)
    _json_out({"channel": ch.label(), "capacity_nats": fmt(cap), "capacity_bits": fmt(cap / LN2),
               "input": [fmt(x) for x in t.probs]})
    return 0


def _type_arg(ch, t0):
    if ch.is_bimsc and t0 is None:
        return None
    if t0 is None:
        return InputDist.uniform(ch.n_inputs)
    return InputDist.binary(t0)


def cmd_tilt(args):
    cfg = make_config(args)
    ch = parse_channel(args.channel, cfg)
    atoms = atoms_for(ch, _type_arg(ch, args.t0))
    out = []
    for lam in parse_range(args.lam, integer=False):
        m = moments_at(atoms, lam)
        out.append({k: fmt(getattr(m, k)) for k in
                    ("lam", "delta", "sigma2", "m3abs", "m3", "rate", "dsigma2")})
    res = {"channel": ch.label(), "delta_cap": fmt(delta_cap(atoms, cfg)), "moments": out}
    if ch.is_bimsc and args.t0 is None:
        res["zeta"] = fmt(zeta(ch))
    _json_out(res)
    return 0


def cmd_delta(args):
    cfg = make_config(args)
    ch = parse_channel(args.channel, cfg)
    res = solve_delta_n(ch, args.n, args.eps, cfg, _type_arg(ch, args.t0))
    _json_out({"channel": ch.label(), "n": args.n, "eps": fmt(args.eps), "delta": fmt(res.value),
               "lam": fmt(res.lam), "residual": fmt(res.residual), "iterations": res.iterations,
               "status": res.status})
    return 0


def _grid_args(args, ns):
    cfg = make_config(args)
    ch = parse_channel(args.channel, cfg)
    spec = parse_eps(args)
    names = resolve_names(args.bounds.split(","), args.error_model)
    c = c_value(ch, args.c_frac)
    return run_curve(ch, names, ns, spec, args.out, args.format, c, cfg, args.jobs,
                     args.tail, args.strict)


def cmd_bound(args):
    return _grid_args(args, [args.n])


def cmd_curve(args):
    return _grid_args(args, parse_range(args.n))


def cmd_tstar(args):
    cfg = make_config(args)
    return run_tstar_sweep(parse_range(args.p, integer=False), args.n, args.eps, args.out,
                           args.format, args.c_frac, cfg)


def cmd_verify(args):
    from .verify import run_checks
    results = run_checks(quick=args.quick)
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}\n")
    return 0 if all(ok for _, ok, _ in results) else 3


# ------------------------------------------------------------- parser

def _common(p):
    p.add_argument("--channel", required=True, help="spec file or kind:param")
    p.add_argument("--tol", type=float, help="relative solver tolerance")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--c-be", type=float, help="Berry-Esseen constant")


def _grid_opts(p):
    p.add_argument("--bounds", default="SO,NEP,Normal")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--poly", type=float)
    g.add_argument("--subexp", type=float)
    p.add_argument("--error-model", choices=("avg", "max"), default="max")
    p.add_argument("--c-frac", type=float, help="feasible set I(t) >= F * capacity")
    p.add_argument("--tail", choices=("auto", "xi", "exact"), default="auto")
    p.add_argument("--strict", action="store_true", help="keep the type-counting term")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=int, default=1)


def build_parser():
    ap = argparse.ArgumentParser(prog="fblbounds", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("capacity", help="channel capacity")
    _common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("tilt", help="tilted moments")
    _common(p)
    p.add_argument("--lam", default="0", help="tilt or LO:HI:STEP")
    p.add_argument("--t0", type=float, help="input Pr{X=0} (divergence tilt)")
    p.set_defaults(func=cmd_tilt)

    p = sub.add_parser("delta", help="solve g_n(delta) = eps")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--t0", type=float)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("bound", help="bounds at one block length")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    _grid_opts(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("curve", help="bounds over a block-length grid")
    _common(p)
    p.add_argument("--n", required=True, help="LO:HI:STEP")
    _grid_opts(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("tstar", help="t* sweep for Z channels")
    p.add_argument("--p", default="0.05:0.95:0.05")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--c-frac", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_tstar)

    p = sub.add_parser("verify", help="exact-enumeration checks")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=cmd_verify)
    return ap


def _fail(exc, code):
    sys.stderr.write(json.dumps({"error": type(exc).__name__,
                                 "code": getattr(exc, "code", "error"),
                                 "message": str(exc)}, sort_keys=True) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    with np.errstate(all="ignore"):
        try:
            return args.func(args)
        except PreconditionError as exc:
            return _fail(exc, 2)
        except NumericalError as exc:
            return _fail(exc, 3)
        except ValueError as exc:
            return _fail(exc, 2)
        except OSError as exc:
            return _fail(exc, 2)
