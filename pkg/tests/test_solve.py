import math

import numpy as np
import pytest

from fblbounds import InputDist, make_channel
from fblbounds.channels import z_capacity_input
from fblbounds.errors import BracketFailed, OutOfRange, OutOfUniqueRange
from fblbounds.solve import (bisect_increasing, capacity_generic,
                             converse_multiplier, golden_max, invert_delta,
                             optimize_t_sharp, optimize_t_star, q_func, q_inv,
                             so_objective, solve_converse_delta,
                             solve_delta_n, solve_jar_delta)
from fblbounds.tilted import atoms_for, g_eval, moments_at

# Independent values: mpmath root of the closed-form two-point equation.
DELTA_BSC_1000 = 0.066226595715119442577
DELTA_BSC_200 = 0.15399078600459404173
LAM_BSC_1000 = 0.13837357068750223376
DELTA_BEC_500 = 0.057532851823646968612
DELTA_Z_1000 = 0.058190792877338287194


def test_q_roundtrip():
    for p in (1e-9, 1e-3, 0.3):
        assert q_func(q_inv(p)) == pytest.approx(p, rel=1e-12)
    with pytest.raises(OutOfRange):
        q_inv(0.0)


def test_delta_n_reference_values(bsc, bec, zch, uniform2):
    r = solve_delta_n(bsc, 1000, 1e-3)
    assert r.value == pytest.approx(DELTA_BSC_1000, rel=1e-10)
    assert r.lam == pytest.approx(LAM_BSC_1000, rel=1e-9)
    assert r.status == "converged"
    assert solve_delta_n(bsc, 200, 1e-3).value == pytest.approx(DELTA_BSC_200, rel=1e-10)
    assert solve_delta_n(bec, 500, 1e-4).value == pytest.approx(DELTA_BEC_500, rel=1e-10)
    assert solve_delta_n(zch, 1000, 1e-6, t=uniform2).value == pytest.approx(DELTA_Z_1000, rel=1e-10)


def test_delta_n_solves_g(bsc):
    d = solve_delta_n(bsc, 700, 1e-5).value
    assert g_eval(bsc, None, 700, d) == pytest.approx(1e-5, rel=1e-9)


def test_delta_n_half_is_zero(bsc):
    assert solve_delta_n(bsc, 100, 0.5).value == 0.0


def test_delta_n_rejects_bad_eps(bsc):
    with pytest.raises(OutOfRange):
        solve_delta_n(bsc, 100, 0.7)


def test_delta_n_out_of_unique_range(bsc):
    with pytest.raises(OutOfUniqueRange):
        solve_delta_n(bsc, 10, 1e-300)


def test_invert_delta(bsc):
    atoms = atoms_for(bsc)
    lam = invert_delta(atoms, 0.1).value
    assert moments_at(atoms, lam).delta == pytest.approx(0.1, rel=1e-12)
    with pytest.raises(BracketFailed):
        invert_delta(atoms, 10.0)
    with pytest.raises(OutOfRange):
        invert_delta(atoms, -0.1)


def test_converse_multiplier(bsc, zch, uniform2):
    a = atoms_for(bsc)
    s = math.sqrt(-2 * math.log(1e-3) / 100)
    sig = math.sqrt(a.raw(0)[2])
    assert converse_multiplier(a, 100, 1e-3, "max") == pytest.approx(1 + s / sig)
    assert converse_multiplier(a, 100, 1e-3, "avg") == pytest.approx(1 + 2 * s / sig)
    assert converse_multiplier(atoms_for(zch, uniform2), 100, 1e-3, "max") == pytest.approx(1 + s)


def test_converse_delta_below_delta_n(bsc):
    so = solve_delta_n(bsc, 1000, 1e-3).value
    cv = solve_converse_delta(bsc, 1000, 1e-3).value
    assert cv < so


def test_jar_delta_exceeds_delta_n(bsc):
    assert solve_jar_delta(bsc, 1000, 1e-3).value > solve_delta_n(bsc, 1000, 1e-3).value


def test_golden_and_bisect():
    x, v = golden_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert bisect_increasing(lambda x: x ** 3 - 0.125, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_t_star_beats_capacity_input():
    ch = make_channel("z", [0.3])
    t, v = optimize_t_star(ch, 1000, 1e-6)
    vc = so_objective(ch, InputDist.binary(z_capacity_input(0.3)), 1000, 1e-6)
    assert v >= vc
    assert abs(t.t0 - z_capacity_input(0.3)) > 1e-3


def test_t_sharp_feasible():
    ch = make_channel("z", [0.3])
    t, v = optimize_t_sharp(ch, 1000, 1e-6)
    assert 0 < t.t0 < 1 and math.isfinite(v)


def test_blahut_arimoto_three_inputs():
    W = np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
    c, t = capacity_generic(make_channel("matrix", W.tolist()))
    expected = math.log(3) + 0.8 * math.log(0.8) + 0.2 * math.log(0.1)
    assert c == pytest.approx(expected, abs=1e-11)
    assert np.allclose(t.probs, 1 / 3, atol=1e-6)
