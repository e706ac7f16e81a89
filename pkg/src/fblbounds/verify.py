"""Exact-enumeration checks of the analytic machinery.

Each check returns ``(name, ok, detail)``.  They are shipped with the
library so users can rerun them with ``fblbounds verify``.
"""

import math

import numpy as np

from .channels import InputDist, make_channel
from .errors import BerryEsseenDominates
from .mirror import p_outer_jar
from .oracle import exact_mirror, exact_tail_bimsc, exact_tail_dimc
from .solve import invert_delta, solve_delta_n
from .tilted import atoms_for, delta_cap, moments_at, xi_pair

_REL = 1e-12  # slack for rounding in the comparisons


def sandwich_counts(ch, t, ns, n_delta=12):
    """Checked and violating (n, delta) points of the tail sandwich.

    The deviation grid is ``k/(n_delta+1) * cap/2`` for ``k = 1..n_delta``;
    points where the sandwich factors are undefined are skipped.
    """
    atoms = atoms_for(ch, t)
    grid = 0.5 * delta_cap(atoms) * np.arange(1, n_delta + 1) / (n_delta + 1)
    checked, bad = 0, []
    for d in grid:
        m = moments_at(atoms, invert_delta(atoms, float(d)).value)
        for n in ns:
            try:
                xp = xi_pair(m, n)
            except BerryEsseenDominates:
                continue
            if t is None:
                ex = exact_tail_bimsc(ch, n, float(d)).prob
            else:
                if abs(t.t0 * n - round(t.t0 * n)) > 1e-9:
                    continue
                ex = exact_tail_dimc(ch, t, n, float(d)).prob
            e = math.exp(-n * m.rate)
            checked += 1
            if not (xp.xi_lower * e * (1 - _REL) <= ex <= xp.xi_upper * e * (1 + _REL)):
                bad.append((n, float(d)))
    return checked, bad


def check_bimsc_sandwich():
    out = []
    for kind, p in (("bsc", 0.11), ("bec", 0.5)):
        ch = make_channel(kind, [p])
        checked, bad = sandwich_counts(ch, None, range(8, 31))
        out.append((f"sandwich {kind}({p}) n=8..30", checked > 0 and not bad,
                    f"checked={checked} violations={len(bad)}"))
    return out


def check_dimc_sandwich():
    ch = make_channel("z", [0.5])
    checked, bad = sandwich_counts(ch, InputDist.uniform(2), range(8, 15))
    return [("sandwich z(0.5) uniform n=8..14", checked > 0 and not bad,
             f"checked={checked} violations={len(bad)}")]


def check_half():
    worst = 0.0
    for kind, p in (("bsc", 0.11), ("bec", 0.5), ("biagc", 0.0), ("z", 0.5)):
        ch = make_channel(kind, [p])
        t = None if ch.is_bimsc else InputDist.uniform(2)
        for n in (100, 1000):
            worst = max(worst, abs(solve_delta_n(ch, n, 0.5, t=t).value))
    return [("delta_n(1/2) = 0", worst <= 1e-10, f"max |delta|={worst:.3g}")]


def check_mirror(ns=(4, 6, 8)):
    out = []
    ch = make_channel("bec", [0.5])
    worst = 0.0
    for n in ns:
        for d in (0.05, 0.1, 0.2):
            a = exact_mirror(ch, None, n, d).prob
            b = exact_tail_bimsc(ch, n, d).prob
            worst = max(worst, abs(a - b))
    out.append(("bec mirror set equals the erasure tail", worst <= 1e-14, f"max diff={worst:.3g}"))
    ch = make_channel("z", [0.5])
    t = InputDist.uniform(2)
    bad = 0
    for n in ns:
        for d in (0.02, 0.05, 0.1, 0.2):
            ex = exact_mirror(ch, t, n, d).prob
            bound = p_outer_jar(ch, t, n, d).log_prob
            if ex > 0 and math.log(ex) > bound + 1e-9:
                bad += 1
    out.append(("z(0.5) mirror bound dominates enumeration", bad == 0, f"violations={bad}"))
    return out


def run_checks(quick=False):
    res = check_half() + check_mirror()
    if not quick:
        res += check_bimsc_sandwich() + check_dimc_sandwich()
    return res


def tail_invariance(ch, t, n, delta, seqs):
    """Exact conditional tails for several input sequences of one type."""
    return [exact_tail_dimc(ch, t, n, delta, np.asarray(s)).prob for s in seqs]
