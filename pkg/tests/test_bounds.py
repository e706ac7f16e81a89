import math

import pytest

from fblbounds import InputDist, make_channel
from fblbounds import bounds as B
from fblbounds.errors import OutOfRange, Unsupported
from fblbounds.solve import q_inv
from fblbounds.tilted import atoms_for

# Independent values: DT error bound summed exactly in mpmath.
DT_Z05_N100_M50_R01 = 0.0023911238102946566689
DT_Z0001_N1000_M498_R06 = 3.3975953045935054239e-27


def test_rate_bits_conversion():
    rb = B.RateBound("SO", 10, 0.1, math.log(2))
    assert rb.rate_bits == pytest.approx(1.0)


def test_so_rate_is_capacity_minus_delta(bsc):
    rb = B.so_rate(bsc, 1000, 1e-3)
    assert rb.rate_nats == pytest.approx(0.34663184364127916 - 0.066226595715119443, rel=1e-10)


def test_normal_rate(bsc):
    s2 = atoms_for(bsc).raw(0)[2]
    rb = B.normal_rate(bsc, 1000, 1e-3)
    assert rb.rate_nats == pytest.approx(B.capacity_of(bsc) - math.sqrt(s2 / 1000) * q_inv(1e-3))
    ln = B.normal_rate(bsc, 1000, 1e-3, "plus_ln")
    assert ln.rate_nats == pytest.approx(rb.rate_nats + 0.5 * math.log(1000) / 1000)


def test_bec_nep_equals_so():
    for p in (0.05, 0.9):
        ch = make_channel("bec", [p])
        for n in (200, 1100, 2000):
            assert B.nep_rate(ch, n, 1e-6).rate_nats == pytest.approx(B.so_rate(ch, n, 1e-6).rate_nats, abs=1e-10)


def test_bsc_nep_adds_second_order_term(bsc):
    so = B.so_rate(bsc, 1000, 1e-3).rate_nats
    nep = B.nep_rate(bsc, 1000, 1e-3).rate_nats
    assert nep > so


def test_ordering_bsc(bsc):
    n, eps = 1000, 1e-3
    jar = B.jar_rate(bsc, n, eps).rate_nats
    nep = B.nep_rate(bsc, n, eps).rate_nats
    avg = B.exact_converse(bsc, n, eps, "avg").rate_nats
    mx = B.exact_converse(bsc, n, eps, "max").rate_nats
    assert jar < nep < mx < B.capacity_of(bsc)
    assert mx <= avg


def test_converse_tail_routes_agree_roughly(bsc):
    ex = B.exact_converse(bsc, 1000, 1e-3, tail="exact")
    xi = B.exact_converse(bsc, 1000, 1e-3, tail="xi")
    assert ex.meta["tail"] == "exact" and xi.meta["tail"] == "xi"
    assert abs(ex.rate_nats - xi.rate_nats) < 0.02


def test_converse_auto_tail_selection(biagc, bsc):
    assert B.exact_converse(biagc, 1000, 1e-3).meta["tail"] == "xi"
    assert B.exact_converse(bsc, 1000, 1e-3).meta["tail"] == "exact"


def test_converse_rejects_bad_args(bsc):
    with pytest.raises(OutOfRange):
        B.exact_converse(bsc, 100, 1e-3, "median")
    with pytest.raises(OutOfRange):
        B.exact_converse(bsc, 100, 1e-3, tail="fast")
    with pytest.raises(OutOfRange):
        B.exact_converse(bsc, 100, 1.5)


def test_strict_adds_type_counting_term(zch):
    a = B.exact_converse(zch, 500, 1e-3, strict=False).rate_nats
    b = B.exact_converse(zch, 500, 1e-3, strict=True).rate_nats
    assert b - a == pytest.approx(2 * math.log(501) / 500)


def test_jar_achievability_error_bound(bsc):
    rb = B.jar_rate(bsc, 1000, 1e-3)
    assert rb.meta["pe"] == pytest.approx(1e-3, rel=1e-6)
    with pytest.raises(OutOfRange):
        B.jar_achievability(bsc, 1000, 0.0)


def test_dt_reference_values():
    assert math.exp(B.dt_z_log(0.5, 100, 50, 0.1)) == pytest.approx(DT_Z05_N100_M50_R01, rel=1e-12)
    assert B.dt_z_log(0.001, 1000, 498, 0.6) == pytest.approx(math.log(DT_Z0001_N1000_M498_R06), rel=1e-12)
    assert B.dt_z_log(0.5, 100, 50, 0.0) == -math.inf


def test_dt_rate_meets_target(zch):
    rb = B.dt_z_rate(zch, 400, 1e-4, t=InputDist.uniform(2))
    assert B.dt_z(zch, 400, rb.rate_nats, InputDist.uniform(2)) <= 1e-4 * (1 + 1e-9)
    assert B.dt_z(zch, 400, rb.rate_nats + 1e-6, InputDist.uniform(2)) > 1e-4


def test_dt_only_for_z(bsc):
    with pytest.raises(Unsupported):
        B.dt_z_rate(bsc, 100, 1e-3)


def test_dt_below_nep_below_converse():
    ch = make_channel("z", [0.9])
    n, eps = 600, 1e-6
    dt = B.dt_z_rate(ch, n, eps).rate_nats
    nep = B.nep_rate(ch, n, eps).rate_nats
    mx = B.exact_converse(ch, n, eps).rate_nats
    assert dt <= nep <= mx


def test_compute_dispatch(bsc):
    for name in ("SO", "NEP", "Normal", "NormalLn", "ExactConverseAvg", "ExactConverseMax",
                 "JarAchievability"):
        assert B.compute(name, bsc, 500, 1e-3).name == name
    with pytest.raises(OutOfRange):
        B.compute("Best", bsc, 500, 1e-3)


def test_non_symmetric_meta_carries_type(zch):
    rb = B.so_rate(zch, 500, 1e-3)
    assert 0 < rb.meta["t0"] < 1
