import math

import numpy as np
import pytest
from scipy.stats import binom

from fblbounds import InputDist, make_channel
from fblbounds.errors import (DegenerateVariance, OutOfRange, TooLarge,
                              Unsupported)
from fblbounds.oracle import (bimsc_log_tail, exact_converse_delta,
                              exact_mirror, exact_tail_bimsc, exact_tail_dimc)
from fblbounds.verify import (check_half, check_mirror, sandwich_counts,
                              tail_invariance)

# Independent values (exact rational sums in mpmath).
TAIL_BSC_N10_D01 = 0.30279075662210443409


def test_bsc_tail_reference(bsc):
    r = exact_tail_bimsc(bsc, 10, 0.1)
    assert r.prob == pytest.approx(TAIL_BSC_N10_D01, rel=1e-13)


def test_bsc_tail_is_binomial_sf(bsc):
    p = 0.11
    a, b = -math.log1p(-p), -math.log(p)
    H = (1 - p) * a + p * b
    for n in (8, 20, 30):
        for d in (0.05, 0.2):
            kmin = math.floor((n * (H + d) - n * a) / (b - a)) + 1
            assert exact_tail_bimsc(bsc, n, d).prob == pytest.approx(binom.sf(kmin - 1, n, p), rel=1e-12)


def test_log_tail_large_n(bsc):
    lp, terms = bimsc_log_tail(bsc, 5000, 0.1)
    assert lp < -10 and terms > 0
    assert bimsc_log_tail(bsc, 100, 10.0) == (-math.inf, 0)


def test_bimsc_limits(bsc, zch):
    with pytest.raises(TooLarge):
        exact_tail_bimsc(bsc, 31, 0.1)
    with pytest.raises(Unsupported):
        exact_tail_bimsc(zch, 10, 0.1)


def test_z_dimc_tail_reference(zch, uniform2):
    # four zeros each flip with probability 1/2; the event needs no flip
    assert exact_tail_dimc(zch, uniform2, 8, 0.2).prob == pytest.approx(0.0625, abs=1e-15)


def test_dimc_tail_bsc_matches_binomial(bsc, uniform2):
    # for the BSC under uniform input the density counts crossovers
    p = 0.11
    n = 10
    info = math.log(2) - (-(1 - p) * math.log(1 - p) - p * math.log(p))
    hi, lo = math.log(2 * (1 - p)), math.log(2 * p)
    d = 0.15
    k = np.arange(n + 1)
    stat = (n - k) * hi + k * lo
    expected = binom.pmf(k, n, p)[stat <= n * (info - d) + 1e-12].sum()
    assert exact_tail_dimc(bsc, uniform2, n, d).prob == pytest.approx(expected, rel=1e-12)


def test_dimc_tail_permutation_invariant(zch):
    t = InputDist.binary(0.5)
    vals = tail_invariance(zch, t, 6, 0.1, [[0, 0, 0, 1, 1, 1], [1, 0, 1, 0, 1, 0], [1, 1, 1, 0, 0, 0]])
    assert max(vals) - min(vals) <= 1e-15


def test_dimc_preconditions(zch, uniform2):
    with pytest.raises(OutOfRange):
        exact_tail_dimc(zch, InputDist.binary(0.3), 8, 0.1)
    with pytest.raises(TooLarge):
        exact_tail_dimc(zch, uniform2, 16, 0.1)
    with pytest.raises(OutOfRange):
        exact_tail_dimc(zch, uniform2, 4, 0.1, [0, 0, 0, 1])
    with pytest.raises(DegenerateVariance):
        exact_tail_dimc(make_channel("z", [0.5]), InputDist.binary(0.0), 4, 0.1)
    with pytest.raises(Unsupported):
        exact_tail_dimc(make_channel("biagc", [0.0]), uniform2, 4, 0.1)


def test_bec_mirror_equals_erasure_tail(bec):
    for n in (4, 7, 10):
        for d in (0.01, 0.1, 0.25):
            assert exact_mirror(bec, None, n, d).prob == pytest.approx(
                exact_tail_bimsc(bec, n, d).prob, abs=1e-15)


def test_mirror_enumeration_limit(bsc):
    with pytest.raises(TooLarge):
        exact_mirror(bsc, None, 15, 0.1)


def test_exact_converse_delta_bsc(bsc):
    n, eps = 500, 1e-3
    d, t = exact_converse_delta(bsc, n, eps, "max")
    assert t is None and isinstance(d, float)
    p = 0.11
    a, b = -math.log1p(-p), -math.log(p)
    H = (1 - p) * a + p * b
    k = round((n * (H + d) - n * a) / (b - a))
    s = math.sqrt(-2 * math.log(eps) / n)
    target = (1 + s / math.sqrt(p * (1 - p)) / (b - a)) * eps
    # k is the largest count whose upper tail still covers the target
    assert binom.sf(k - 1, n, p) >= target > binom.sf(k, n, p)


def test_exact_converse_delta_z_type_rounding():
    ch = make_channel("z", [0.5])
    d, t = exact_converse_delta(ch, 101, 1e-3, "max", InputDist.binary(0.4))
    assert t.t0 == 40 / 101
    with pytest.raises(OutOfRange):
        exact_converse_delta(ch, 10, 1e-3, "max", InputDist.binary(0.01))


def test_verify_quick_checks_pass():
    assert all(ok for _, ok, _ in check_half() + check_mirror())


def test_sandwich_small_grid(bsc):
    checked, bad = sandwich_counts(bsc, None, range(20, 31), n_delta=4)
    assert checked > 0 and not bad
