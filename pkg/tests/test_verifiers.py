import math

import numpy as np
import pytest

from cbmkit.geometry import CoStar, box, disc, make_grid, scale, star_fourier
from cbmkit.measures import cone_w0, homogeneous_measure
from cbmkit.verifiers import (bonnesen_concavity, cbm_battery, check_bm, check_cbm, check_iso_warped,
                              check_isoperimetry, check_ocbm_nd, closure_suite, equality_diagnostics,
                              profile_search, random_convex, random_star_body)

PHI_EXP = lambda t: t ** -2 * math.exp(1 / t)


@pytest.fixture(scope="module")
def quadrant(g2):
    return homogeneous_measure(cone_w0(2, math.pi / 4, axis=math.pi / 4), math.inf, g2)


def test_bm_on_homothetic_squares(lebesgue, g2):
    r = check_bm(lebesgue, box(g2, [0, 0], [1, 1]), box(g2, [0, 0], [2, 2]), 0.5, 0.5)
    assert r.lhs == pytest.approx(2.25) and r.rhs == pytest.approx(2.25) and r.passed
    assert abs(r.slack) <= 1e-9 * r.lhs


def test_bm_on_elongated_box(lebesgue, g2):
    r = check_bm(lebesgue, box(g2, [0, 0], [1, 1]), box(g2, [0, 0], [4, 1]), 0.5, 0.5)
    assert r.lhs == pytest.approx(2.5) and r.rhs == pytest.approx(2.25) and r.slack > 0


def test_bm_in_the_quadrant(quadrant, g2):
    r = check_bm(quadrant, disc(g2, 1.0), disc(g2, 3.0), 0.5, 0.5)
    assert r.lhs == pytest.approx(math.pi, rel=1e-9)
    assert abs(r.slack) <= 1e-9 * r.lhs


def test_cbm_on_concentric_discs(inv_cube, g2):
    r = check_cbm(inv_cube, disc(g2, 1.0), disc(g2, 3.0), 0.5, -1.0)
    assert r.lhs == pytest.approx(math.pi, rel=1e-12) and r.rhs == pytest.approx(math.pi, rel=1e-12)
    assert r.path == "closed_form" and r.passed


def test_cbm_disc_and_square_has_room(inv_cube, g2):
    r = check_cbm(inv_cube, disc(g2, 1.0), box(g2, [-1, -1], [1, 1]), 0.5, -1.0)
    assert r.passed and r.slack > 0


def test_cbm_nonconvex_uses_grid_sum(inv_cube, g2):
    A = star_fourier(g2, 1.0, [0.0, 0.0, 0.3])
    r = check_cbm(inv_cube, A, disc(g2, 1.0), 0.5, -1.0)
    assert r.path == "voxel" and r.passed and r.rel_tolerance == 1e-3


def test_cbm_on_half_lines():
    g1 = make_grid(1)
    mu = homogeneous_measure(np.array([0.0, 1.0]), math.inf, g1)
    for a, b, lam in [(1.0, 3.0, 0.5), (0.5, 4.0, 0.2)]:
        r = check_cbm(mu, CoStar(box(g1, [-1], [a])), CoStar(box(g1, [-1], [b])), lam, 1.0)
        want = lam * a + (1 - lam) * b
        assert r.lhs == pytest.approx(want, rel=1e-12) and r.rhs == pytest.approx(want, rel=1e-12)
        assert r.passed


def test_cbm_slack_shrinks_as_exponent_grows(inv_cube, g2):
    rng = np.random.default_rng(9)
    for _ in range(30):
        A, B = random_convex(g2, rng), random_convex(g2, rng)
        reps = [check_cbm(inv_cube, A, B, 0.3, q) for q in (-3.0, -1.0, -0.5, -0.1)]
        raw = [r.lhs - r.rhs for r in reps]
        assert all(d2 <= d1 + 1e-12 for d1, d2 in zip(raw, raw[1:]))
        assert all(r.passed for r in reps[1:])


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 4.0])
def test_isoperimetric_equality_for_discs(inv_cube, g2, t):
    K = disc(g2, 1.0)
    r = check_isoperimetry(inv_cube, K, CoStar(scale(K, t)), -1.0)
    assert r.lhs == pytest.approx(2 * math.pi / t ** 2, rel=1e-12)
    assert abs(r.slack) <= 1e-9 * r.lhs


def test_classical_isoperimetry(lebesgue, g2):
    K = disc(g2, 1.0)
    r = check_isoperimetry(lebesgue, K, disc(g2, 2.0), 0.5)
    assert r.lhs == pytest.approx(4 * math.pi) and abs(r.slack) <= 1e-9 * r.lhs


def test_quadrant_isoperimetry(quadrant, g2):
    K = disc(g2, 1.0)
    for t in (0.5, 2.0):
        r = check_isoperimetry(quadrant, K, disc(g2, t), 0.5)
        assert r.lhs == pytest.approx(math.pi / 2 * t, rel=1e-9)
        assert abs(r.slack) <= 1e-9 * r.lhs


def test_isoperimetry_rejects_wrong_set_kind(inv_cube, lebesgue, g2):
    K = disc(g2, 1.0)
    with pytest.raises(ValueError):
        check_isoperimetry(inv_cube, K, K, -1.0)
    with pytest.raises(ValueError):
        check_isoperimetry(lebesgue, K, CoStar(K), 0.5)


def test_ocbm_on_homothetic_discs(inv_cube, g2):
    r = check_ocbm_nd(inv_cube, disc(g2, 2.0), disc(g2, 1.0), 3.0)
    assert r.lhs == pytest.approx(2 * math.pi / 5, rel=1e-12)
    assert abs(r.slack) <= 1e-9 * r.lhs


def test_ocbm_for_warped_measure(warped_exp, g2):
    r = check_ocbm_nd(warped_exp, disc(g2, 2.0), disc(g2, 1.0), 1.0)
    assert r.lhs == pytest.approx(2 * math.pi * (math.exp(1 / 3) - 1), rel=1e-12)
    assert abs(r.slack) <= 1e-9 * r.lhs


def test_ocbm_without_dilation(warped_exp, g2):
    r = check_ocbm_nd(warped_exp, star_fourier(g2, 1.5, [0.2]), disc(g2, 1.0), 0.0)
    assert r.passed and abs(r.slack) <= 1e-9 * r.lhs


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_warped_isoperimetric_equality(warped_exp, g2, t):
    r = check_iso_warped(warped_exp, disc(g2, 1.0), CoStar(disc(g2, t)))
    assert r.lhs == pytest.approx(2 * math.pi * PHI_EXP(t), rel=1e-12)
    assert abs(r.slack) <= 1e-9 * r.lhs


def test_warped_isoperimetry_strict_for_perturbed_costar(warped_exp, g2):
    r = check_iso_warped(warped_exp, disc(g2, 1.0), CoStar(star_fourier(g2, 1.0, [0, 0, 0.1])))
    assert r.passed and r.slack > 1e-3 * r.lhs


def test_bonnesen_on_homothets_and_mixed_pairs(lebesgue, g2):
    assert bonnesen_concavity(lebesgue, disc(g2, 1.0), disc(g2, 2.0), 0.5).affinity_defect <= 1e-9
    r = bonnesen_concavity(lebesgue, box(g2, [0, 0], [1, 1]), disc(g2, 1.0), 0.5)
    assert r.passed and r.affinity_defect > 1e-3
    same = bonnesen_concavity(lebesgue, disc(g2, 1.0), disc(g2, 1.0), 0.5)
    assert np.ptp(same.psi) == 0.0


def test_equality_diagnostics_examples(g2):
    K = star_fourier(g2, 1.0, [0.1], [0.05])
    d = equality_diagnostics(scale(K, 2.0), K)
    assert d.ratio == pytest.approx(2.0) and d.homothety_residual <= 1e-12
    d = equality_diagnostics(star_fourier(g2, 1.0, [0.2]), disc(g2, 1.0))
    assert d.homothety_residual == pytest.approx(0.2 * 2 / math.pi, rel=1e-3) and not d.homothetic
    d = equality_diagnostics(box(g2, [0, 0], [1, 1]), box(g2, [1, 0], [2, 1]), translation_search=True)
    assert d.homothety_residual <= 1e-9 and np.allclose(d.shift, [-1, 0], atol=1e-9)


def test_convexity_deficit(g2):
    assert equality_diagnostics(disc(g2, 1.0), disc(g2, 2.0)).convexity_deficit == 0.0
    assert equality_diagnostics(star_fourier(g2, 1.0, [0, 0, 0.3]), disc(g2, 1.0)).convexity_deficit > 1e-3


def test_small_battery(inv_cube):
    res = cbm_battery(inv_cube, -1.0, 60, seed=5, star_fraction=0.05)
    assert res.passed and res.instances == 60 and "voxel" in res.paths


def test_three_dimensional_battery(g3):
    mu = homogeneous_measure(1.0, -0.25, g3)
    res = cbm_battery(mu, mu.q, 40, seed=2)
    assert res.passed


def test_closure_examples(g2):
    w = lambda d: 1.0 + 0.5 * d[:, 0] ** 2
    rot = lambda d: 1.0 + 0.5 * d[:, 1] ** 2
    mus = [homogeneous_measure(w, -1 / 3, g2), homogeneous_measure(rot, -1 / 3, g2)]
    out = closure_suite(mus, [0.5, 0.5], [[2, 0], [0, 1]], -1.0, -0.5)
    assert all(b.passed for b in out.values())
    leb = homogeneous_measure(1.0, math.inf, g2)
    out = closure_suite([leb, leb], [0.5, 0.5], [[2, 0], [0, 1]], 0.5)
    assert all(b.passed for b in out.values())
    with pytest.raises(ValueError):
        closure_suite(mus, [0.5, 0.5], [[1, 2], [2, 4]], -1.0)
    with pytest.raises(ValueError):
        closure_suite(mus, [0.5, 0.5], [[2, 0], [0, 1]], -1.0, -2.0)


def test_pushforward_keeps_bm_slack(g2):
    leb = homogeneous_measure(1.0, math.inf, g2)
    from cbmkit.measures import PushforwardMeasure
    T = np.array([[2.0, 0.0], [0.0, 1.0]])
    A, B = box(g2, [0, 0], [1, 1]), box(g2, [0, 0], [4, 1])
    r0 = check_bm(leb, A, B, 0.5, 0.5)
    r1 = check_bm(PushforwardMeasure(leb, T), A, B, 0.5, 0.5)
    assert r1.slack == pytest.approx(0.5 * r0.slack, rel=1e-9)


def test_profile_search_homothets_only(g2, inv_cube):
    r = profile_search(inv_cube, disc(g2, 1.0), 2 * math.pi, degree=0)
    assert abs(r.gap) <= 1e-10


def test_profile_search_half_mass(inv_cube, g2):
    r = profile_search(inv_cube, disc(g2, 1.0), math.pi, degree=2, seed=1)
    assert r.mean_radius == pytest.approx(2.0, rel=1e-2)
    assert r.best == pytest.approx(math.pi / 2, rel=1e-3)
    assert r.gap >= -1e-9


def test_random_star_bodies_are_positive(g2):
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert random_star_body(g2, rng).rho.min() > 0
