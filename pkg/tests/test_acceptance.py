"""Acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in the
"acceptance criteria" section at the end of the pytest run.
"""

import math
import os
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from fblbounds import InputDist, make_channel
from fblbounds.cli import EpsilonSpec, run_grid, tstar_sweep
from fblbounds.solve import q_inv, solve_delta_n
from fblbounds.tilted import atoms_for, moments_at, zeta, zeta_closed_form
from fblbounds.verify import sandwich_counts

GRID = list(range(200, 2001, 100))
RECIPES = Path(__file__).resolve().parent.parent / "recipes"
# Calibration constant for the uniform-input objective ratio.
UNIFORM_RATIO_MIN = 0.99


def _rates(ch, eps, names):
    rows = run_grid(ch, GRID, EpsilonSpec("fixed_eps", eps), names)
    out = {name: {} for name in names}
    for r in rows:
        out[r.bound][r.n] = r.rate_nats
    return out


def test_c1_bimsc_sandwich(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for kind, p in (("bsc", 0.11), ("bec", 0.5)):
        checked, bad = sandwich_counts(make_channel(kind, [p]), None, range(8, 31), n_delta=12)
        ok &= checked > 0 and not bad
        parts.append(f"{kind}({p}): {checked} checked, {len(bad)} violations")
    dt = time.perf_counter() - t0
    ok &= dt < 10
    assert report("C1", ok, f"{'; '.join(parts)}; {dt:.2f}s (limit 10s)")


def test_c2_dimc_sandwich(report):
    t0 = time.perf_counter()
    checked, bad = sandwich_counts(make_channel("z", [0.5]), InputDist.uniform(2), range(8, 15),
                                   n_delta=12)
    dt = time.perf_counter() - t0
    ok = checked > 0 and not bad and dt < 30
    assert report("C2", ok, f"z(0.5) uniform: {checked} checked, {len(bad)} violations; "
                            f"{dt:.2f}s (limit 30s)")


def test_c3_delta_at_one_half(report):
    worst = 0.0
    for kind, p in (("bsc", 0.11), ("bec", 0.5), ("biagc", 0.0), ("z", 0.5)):
        ch = make_channel(kind, [p])
        t = None if ch.is_bimsc else InputDist.uniform(2)
        for n in (100, 1000):
            worst = max(worst, abs(solve_delta_n(ch, n, 0.5, t=t).value))
    assert report("C3", worst <= 1e-10, f"max |delta_n(1/2)| = {worst:.3g} (limit 1e-10)")


def test_c4_bec_nep_equals_so(report):
    worst = 0.0
    for p in (0.05, 0.9):
        ch = make_channel("bec", [p])
        for eps in (1e-3, 1e-6):
            r = _rates(ch, eps, ["SO", "NEP"])
            worst = max(worst, max(abs(r["NEP"][n] - r["SO"][n]) for n in GRID))
    assert report("C4", worst <= 1e-10, f"max |NEP - SO| = {worst:.3g} nats (limit 1e-10)")


def _c5_bsc_0001():
    r = _rates(make_channel("bsc", [0.001]), 1e-6, ["SO", "Normal", "ExactConverseMax"])
    above = [n for n in GRID if r["Normal"][n] > r["ExactConverseMax"][n]]
    so_bad = [n for n in GRID if not r["SO"][n] <= r["ExactConverseMax"][n]]
    ok = len(above) >= 1 and not so_bad
    return ok, f"bsc(0.001): Normal > Exact at {len(above)}/{len(GRID)} n, SO > Exact at {so_bad}"


def _c5_bsc_011():
    r = _rates(make_channel("bsc", [0.11]), 1e-3, ["SO", "Normal"])
    gap = abs(r["Normal"][2000] - r["SO"][2000]) / r["SO"][2000]
    return gap < 0.02, f"bsc(0.11): gap at n=2000 {gap:.4%} (limit 2%)"


def _c5_z(p, eps):
    r = _rates(make_channel("z", [p]), eps, ["DTZ", "NEP", "ExactConverseMax"])
    bad = [n for n in GRID
           if not r["DTZ"][n] <= r["NEP"][n] <= r["ExactConverseMax"][n]]
    detail = ", ".join(f"n={n} DT={r['DTZ'][n]:.5f} NEP={r['NEP'][n]:.5f} "
                       f"Exact={r['ExactConverseMax'][n]:.5f}" for n in bad)
    return not bad, f"z({p}) eps={eps:g}: ordering broken at {len(bad)} n" + (
        f" [{detail}]" if bad else "")


C5_CASES = {
    "C5.1": _c5_bsc_0001,
    "C5.2": _c5_bsc_011,
    "C5.3": lambda: _c5_z(0.001, 1e-9),
    "C5.4": lambda: _c5_z(0.9, 1e-6),
}


@pytest.mark.parametrize("key", list(C5_CASES))
def test_c5_figure_ordering(key, report):
    ok, detail = C5_CASES[key]()
    assert report(key, ok, detail)


def test_c6_zeta_signs(report):
    bsc_neg = all(zeta(make_channel("bsc", [p])) < 0 for p in (0.001, 0.11, 0.4))
    bec_half = abs(zeta(make_channel("bec", [0.5])))
    bec_pos = zeta(make_channel("bec", [0.9])) > 0
    worst = 0.0
    for kind, p in (("bsc", 0.001), ("bsc", 0.11), ("bsc", 0.4), ("bec", 0.05), ("bec", 0.9)):
        ch = make_channel(kind, [p])
        worst = max(worst, abs(zeta_closed_form(ch) / zeta(ch) - 1))
    ok = bsc_neg and bec_half <= 1e-12 and bec_pos and worst <= 1e-9
    assert report("C6", ok, f"bsc<0: {bsc_neg}, |zeta_bec(0.5)|={bec_half:.2g}, "
                            f"zeta_bec(0.9)>0: {bec_pos}, closed-form rel err {worst:.2g}")


@pytest.fixture(scope="module")
def tstar_rows():
    return tstar_sweep([round(0.05 * k, 2) for k in range(1, 20)], 1000, 1e-6)


def test_c7_1_tstar_departs_from_capacity_input(tstar_rows, report):
    gaps = [abs(r[1] - r[2]) for r in tstar_rows]
    assert report("C7.1", min(gaps) > 1e-3, f"min |t*(0) - t_cap(0)| = {min(gaps):.4g} (limit 1e-3)")


def test_c7_2_uniform_input_close_to_optimum(tstar_rows, report):
    low = [(r[0], r[5]) for r in tstar_rows if not r[5] >= UNIFORM_RATIO_MIN]
    worst = min(r[5] for r in tstar_rows)
    detail = f"min uniform ratio {worst:.4f} (limit {UNIFORM_RATIO_MIN})"
    if low:
        detail += "; below at " + ", ".join(f"p={p:g}: {v:.4f}" for p, v in low)
    assert report("C7.2", not low, detail)


def test_c8_asymptotic_consistency(report):
    ch = make_channel("bsc", [0.11])
    n, eps = 100_000, 1e-6
    sigma = math.sqrt(atoms_for(ch).raw(0.0)[2])
    ratio = solve_delta_n(ch, n, eps).value * math.sqrt(n) / (sigma * q_inv(eps))
    assert report("C8", 0.98 <= ratio <= 1.02, f"ratio {ratio:.5f} (range [0.98, 1.02])")


def test_c9_numerical_identities(report):
    lams = np.round(np.arange(1, 21) * 0.05, 10)
    h = 1e-5
    worst_d, worst_s = 0.0, 0.0
    for kind, p in (("bsc", 0.11), ("bec", 0.5), ("biagc", 0.0), ("z", 0.5)):
        ch = make_channel(kind, [p])
        atoms = atoms_for(ch, None if ch.is_bimsc else InputDist.uniform(2))
        for lam in lams:
            m = moments_at(atoms, lam)
            up, dn = moments_at(atoms, lam + h), moments_at(atoms, lam - h)
            fd_d = (up.delta - dn.delta) / (2 * h)
            fd_s = (up.sigma2 - dn.sigma2) / (2 * h)
            worst_d = max(worst_d, abs(fd_d - m.sigma2) / m.sigma2)
            # where the signed third moment vanishes, scale by the absolute one
            scale = abs(m.m3) if abs(m.m3) >= 1e-6 * m.m3abs else m.m3abs
            worst_s = max(worst_s, abs(fd_s - atoms.sign * m.m3) / scale)
    quad = max(make_channel("biagc", [s]).quad_agreement for s in (-3.52, 0.0, 9.63))
    ok = worst_d <= 1e-5 and worst_s <= 1e-5 and quad <= 1e-9
    assert report("C9", ok, f"d delta/d lam rel err {worst_d:.2g}, d sigma2/d lam rel err "
                            f"{worst_s:.2g}, quadrature doubling {quad:.2g}")


def _run_recipes(out):
    env = dict(os.environ, FBL=f"{sys.executable} -m fblbounds")
    for script in sorted(RECIPES.glob("fig*.sh")):
        subprocess.run(["sh", str(script), str(out)], check=True, env=env,
                       stdout=subprocess.DEVNULL)
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.mark.skipif(shutil.which("sh") is None, reason="needs a POSIX shell")
def test_c10_recipes_deterministic(tmp_path, report):
    a = _run_recipes(tmp_path / "a")
    b = _run_recipes(tmp_path / "b")
    differ = [k for k in a if a[k] != b.get(k)]
    ok = bool(a) and a.keys() == b.keys() and not differ
    assert report("C10", ok, f"{len(a)} files from {len(list(RECIPES.glob('fig*.sh')))} recipes, "
                             f"{len(differ)} differ")
