import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbmkit.onedim import (IntervalUnion, Phi, Phi_inv, boundary_1d, check_F_concavity, check_logconvex,
                           equality_shape_1d, iso_profile, law_from_function, ocbm_1d, power_exp_law, power_law,
                           random_interval_union)

INV_SQ = power_law(2.0)
EXP = power_exp_law()
LAWS = [INV_SQ, EXP, power_law(3.5)]


def test_tail_integrals():
    assert Phi(INV_SQ, 2.0) == pytest.approx(0.5)
    assert Phi_inv(INV_SQ, 0.5) == pytest.approx(2.0)
    assert Phi(EXP, 1.0) == pytest.approx(math.e - 1, rel=1e-14)
    assert Phi_inv(INV_SQ, 0.0) == math.inf


def test_profiles():
    assert iso_profile(INV_SQ, 0.5) == pytest.approx(0.25)
    assert iso_profile(EXP, math.e - 1) == pytest.approx(math.e, rel=1e-12)
    assert iso_profile(INV_SQ, 0.0) == 0.0


def test_boundary_examples():
    assert boundary_1d(INV_SQ, IntervalUnion.of((2, math.inf)), 1) == pytest.approx(0.25)
    C = IntervalUnion.of((1, 2), (4, math.inf))
    assert boundary_1d(INV_SQ, C, 1) == pytest.approx(1.0625)
    assert iso_profile(INV_SQ, C.measure(INV_SQ)) == pytest.approx(0.5625)
    assert boundary_1d(INV_SQ, C, 2) == 2 * boundary_1d(INV_SQ, C, 1)


def test_exact_fraction_instances():
    r = ocbm_1d(INV_SQ, IntervalUnion.of((0, 2)), 1, 3)
    assert r.lhs == pytest.approx(0.2, rel=4e-16) and r.rhs == pytest.approx(0.2, rel=4e-16)
    r = ocbm_1d(INV_SQ, IntervalUnion.of((0, 1), (2, 3)), 1, 1)
    assert r.lhs == pytest.approx(0.25, rel=4e-16) and r.rhs == pytest.approx(5 / 11, rel=4e-16)
    assert r.passed


def test_zero_dilation_is_identity():
    A = IntervalUnion.of((0, 1), (2, 3))
    r = ocbm_1d(INV_SQ, A, 1, 0)
    assert r.lhs == pytest.approx(r.rhs, rel=1e-12)


def test_log_convexity_checks():
    assert check_logconvex(INV_SQ).passed
    e = check_logconvex(EXP)
    assert e.passed and e.strict
    gauss = law_from_function(lambda t: np.exp(-np.asarray(t) ** 2), name="gauss")
    assert not check_logconvex(gauss).passed


def test_F_concavity_and_profile_derivative():
    res = check_F_concavity(INV_SQ, 1.0)
    assert res.passed and res.details["derivative_identity"]
    F = lambda x: Phi(INV_SQ, Phi_inv(INV_SQ, x) + 1.0)
    assert F(1.0) == pytest.approx(0.5)
    assert 0.5 * (F(0.5) + F(1.5)) == pytest.approx(0.4666666666666, rel=1e-10)
    assert F(0.0) == 0.0
    assert check_F_concavity(EXP, 0.7).passed


def test_halfline_diagnosis():
    d = equality_shape_1d(INV_SQ, IntervalUnion.of((2, math.inf)), 1)
    assert d.is_halfline and d.equality
    d = equality_shape_1d(INV_SQ, IntervalUnion.of((1, 2), (4, math.inf)), 1)
    assert not d.is_halfline and not d.equality
    d = equality_shape_1d(INV_SQ, IntervalUnion(), 1)
    assert d.is_halfline and d.boundary == 0.0 == d.profile_bound


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
def test_tail_inverse_roundtrip(law):
    # exp(1/t) overflows below t ~ 1.4e-3, so stay where the tail is finite
    ts = np.geomspace(1e-2, 1e3, 200)
    back = np.array([Phi_inv(law, Phi(law, t)) for t in ts])
    assert np.allclose(back, ts, rtol=1e-10)
    assert np.all(np.diff(Phi(law, ts)) < 0)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
def test_random_isoperimetry_and_ocbm(law):
    rng = np.random.default_rng(11)
    for _ in range(400):
        C = random_interval_union(rng, int(rng.integers(1, 5)), start_at_origin=False)
        m = C.measure(law)
        assert boundary_1d(law, C, 1.0) >= iso_profile(law, m) * (1 - 1e-10)
        A = random_interval_union(rng, int(rng.integers(1, 5)))
        assert ocbm_1d(law, A, float(rng.uniform(0.1, 3)), float(rng.uniform(0, 3))).passed


@given(st.floats(0.01, 50), st.floats(0.01, 5), st.floats(0, 5))
def test_single_interval_is_an_equality(a, b, t):
    r = ocbm_1d(INV_SQ, IntervalUnion.of((0, a)), b, t)
    assert abs(r.slack) <= 1e-10 * max(r.lhs, 1e-12)
