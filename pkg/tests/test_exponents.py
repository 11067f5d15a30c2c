import math

import pytest
from hypothesis import given, strategies as st

from cbmkit.exponents import NEG_INF, POS_INF, ZERO, dual_exponent, exponent, power_mean


@pytest.mark.parametrize("p,n,q", [(POS_INF, 3, 1 / 3), (-1 / 3, 2, -1.0), (-1 / 2, 2, NEG_INF), (-1 / 3, 3, NEG_INF),
                                   (1.0, 1, 0.5), (NEG_INF, 2, 0.5)])
def test_dual_exponent_values(p, n, q):
    got = dual_exponent(p, n)
    if math.isinf(q):
        assert got == q
    else:
        assert got == pytest.approx(q, rel=1e-12)


def test_dual_exponent_rejects_zero_for_homogeneous():
    with pytest.raises(ValueError):
        dual_exponent(0.0, 2, homogeneous=True)


def test_tiny_exponent_snaps_to_zero():
    assert exponent(1e-14) == ZERO


@pytest.mark.parametrize("a,b,lam,p,want", [(2, 4, 0.5, 1, 3), (2, 8, 0.5, ZERO, 4), (4, 16, 0.5, -1, 6.4),
                                            (2, 4, 0.5, POS_INF, 4), (2, 4, 0.5, NEG_INF, 2)])
def test_power_mean_values(a, b, lam, p, want):
    assert power_mean(a, b, lam, p) == pytest.approx(want, rel=1e-14)


def test_power_mean_zero_entry_with_nonpositive_exponent():
    assert power_mean(0.0, 5.0, 0.3, -1) == 0.0
    assert power_mean(0.0, 5.0, 0.3, ZERO) == 0.0
    assert power_mean(0.0, 5.0, 0.5, 1) == 2.5


def test_power_mean_infinite_entries():
    assert power_mean(math.inf, 2.0, 0.5, 1) == math.inf
    assert power_mean(math.inf, 2.0, 0.5, -1) == pytest.approx(4.0)


pos = st.floats(1e-6, 1e6)
lams = st.floats(0.01, 0.99)
exps = st.floats(-20, 20)


@given(pos, pos, lams, exps, exps)
def test_power_mean_monotone_in_exponent(a, b, lam, p1, p2):
    lo, hi = sorted((p1, p2))
    assert power_mean(a, b, lam, lo) <= power_mean(a, b, lam, hi) * (1 + 1e-12)


@given(pos, lams, exps)
def test_power_mean_idempotent(a, lam, p):
    assert power_mean(a, a, lam, p) == a


@given(pos, pos, lams, exps, st.floats(1e-3, 1e3))
def test_power_mean_homogeneous(a, b, lam, p, t):
    assert power_mean(t * a, t * b, lam, p) == pytest.approx(t * power_mean(a, b, lam, p), rel=1e-12)


@given(pos, pos, lams)
def test_power_mean_continuous_at_zero(a, b, lam):
    g = power_mean(a, b, lam, ZERO)
    for sign in (1, -1):
        errs = [abs(power_mean(a, b, lam, sign * 10.0 ** -k) - g) for k in range(1, 8)]
        assert all(e2 <= e1 * (1 + 1e-9) + 1e-15 * g for e1, e2 in zip(errs, errs[1:]))
        spread = math.log(max(a, b) / min(a, b))
        assert errs[-1] <= 1e-6 * (1 + spread ** 2) * g
