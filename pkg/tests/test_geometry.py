import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbmkit.geometry import (ConvexBody, GridMismatch, StarBody, box, disc, gauge, linear_image, make_grid,
                             minkowski_sum, polygon, radial_sum, scale, star_fourier)


def test_grid_in_one_dimension():
    g = make_grid(1)
    assert g.directions.ravel().tolist() == [-1.0, 1.0]
    assert g.weights.tolist() == [1.0, 1.0]


def test_small_planar_grid():
    g = make_grid(2, 4)
    assert np.allclose(np.sort(g.angles), [0, math.pi / 2, math.pi, 3 * math.pi / 2])
    assert np.allclose(g.weights, math.pi / 2)


def test_planar_weights_sum_to_circumference():
    assert make_grid(2, 4096).weights.sum() == pytest.approx(2 * math.pi, abs=1e-12)


def test_sphere_weights_sum_to_area():
    assert make_grid(3, 2048).weights.sum() == pytest.approx(4 * math.pi, rel=1e-12)


def test_gauge_examples(g2):
    assert gauge(disc(g2, 1.0), (3, 4)) == pytest.approx(5.0)
    assert gauge(box(g2, [-1, -1], [1, 1]), (3, 4)) == pytest.approx(4.0)
    g1 = make_grid(1)
    assert gauge(box(g1, [-1], [2]), [4.0]) == pytest.approx(2.0)


def test_scale_examples(g2):
    assert np.allclose(scale(disc(g2, 1.0), 2.0).rho, 2.0)
    one = StarBody(g2, np.ones(g2.size))
    assert np.allclose(scale(one, 3.0).rho, 3.0)


@given(st.floats(0.1, 10), st.floats(-5, 5), st.floats(-5, 5))
def test_gauge_homogeneous_under_scaling(t, x, y):
    g = make_grid(2, 256)
    K = polygon(g, [[1, -1], [2, 1], [-1, 2], [-1, -1]])
    if x == 0 and y == 0:
        return
    assert gauge(scale(K, t), (x, y)) == pytest.approx(gauge(K, (x, y)) / t, rel=1e-12)


def test_minkowski_examples(g2):
    S = minkowski_sum(disc(g2, 1.0), disc(g2, 2.0))
    assert np.allclose(S.rho, 3.0)
    H = minkowski_sum(box(g2, [0, 0], [1, 1]), box(g2, [0, 0], [2, 2]), 0.5, 0.5)
    assert np.allclose(H.core.min(axis=0), 0) and np.allclose(H.core.max(axis=0), 1.5)
    DS = minkowski_sum(disc(g2, 1.0), box(g2, [-1, -1], [1, 1]))
    assert DS.volume() == pytest.approx(12 + math.pi, rel=1e-14)


def test_radial_sum_examples(g2):
    A, B = StarBody(g2, np.ones(g2.size)), StarBody(g2, 2 * np.ones(g2.size))
    assert np.allclose(radial_sum(A, B).rho, 3.0)
    C = star_fourier(g2, 1.0, [0.5])
    assert np.allclose(radial_sum(C, A, lam=1.0).rho, C.rho)
    assert np.allclose(radial_sum(C, A).rho, 2 + 0.5 * np.cos(g2.angles))
    assert np.allclose(radial_sum(disc(g2, 1), disc(g2, 2)).rho, minkowski_sum(disc(g2, 1), disc(g2, 2)).rho)


def test_grid_mismatch_is_rejected(g2):
    other = make_grid(2, 512)
    with pytest.raises(GridMismatch):
        radial_sum(disc(g2, 1.0), disc(other, 1.0))


def random_polygon(rng, g):
    th = np.sort(rng.uniform(0, 2 * np.pi, 7))
    pts = np.column_stack([np.cos(th), np.sin(th)]) * rng.uniform(0.5, 2, (7, 1))
    pts = np.vstack([pts, 0.3 * np.array([[1, 0], [0, 1], [-1, 0], [0, -1]])])
    from scipy.spatial import ConvexHull
    return polygon(g, pts[ConvexHull(pts).vertices])


@given(st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_support_additivity_is_exact(seed, lam):
    g = make_grid(2, 512)
    rng = np.random.default_rng(seed)
    A = random_polygon(rng, g)
    B = ConvexBody(g, random_polygon(rng, g).core, float(rng.uniform(0, 1)), "convex")
    S = minkowski_sum(A, B, lam, 1 - lam)
    assert np.allclose(S.h, lam * A.h + (1 - lam) * B.h, rtol=0, atol=1e-12)


@given(st.integers(0, 10_000))
def test_gauge_is_one_on_the_boundary(seed):
    g = make_grid(2, 256)
    rng = np.random.default_rng(seed)
    K = ConvexBody(g, random_polygon(rng, g).core, float(rng.uniform(0, 0.5)), "convex")
    for u, r in zip(g.directions[::16], K.rho[::16]):
        assert gauge(K, r * u) == pytest.approx(1.0, abs=1e-9)


def test_minkowski_sum_contains_radial_sum(g2):
    rng = np.random.default_rng(1)
    for _ in range(20):
        A, B = random_polygon(rng, g2), random_polygon(rng, g2)
        assert np.all(minkowski_sum(A, B).rho >= radial_sum(A, B).rho - 1e-12)


def test_three_dimensional_rounded_box_radial(g3):
    B = ConvexBody(g3, np.array([[-1.0, -0.5, -0.2], [0.3, 1.0, 0.8]]), 0.3, "convex")
    assert np.allclose(B._radial_rounded_box(g3.directions), B._radial_bisect(g3.directions), atol=1e-12)
    P = B.rho[:, None] * g3.directions
    assert np.allclose(B.distance_to_core(P), 0.3, atol=1e-12)


def test_three_dimensional_volumes(g3):
    ball = ConvexBody(g3, np.zeros((2, 3)), 1.0, "ball")
    assert ball.volume() == pytest.approx(4 * math.pi / 3)
    b = box(g3, [-1, -1, -1], [1, 2, 1])
    assert b.volume() == pytest.approx(12.0)
    w = make_grid(3, 8192).weights
    assert np.dot(w, b.rho ** 3) / 3 == pytest.approx(12.0, rel=2e-3)


def test_linear_image_of_polygon_is_exact(g2):
    P = box(g2, [-1, -1], [1, 1])
    Q = linear_image(P, [[2, 0], [0, 1]])
    assert Q.volume() == pytest.approx(8.0)
    D = linear_image(disc(g2, 1.0), [[2, 0], [0, 1]])
    assert 0.5 * np.dot(g2.weights, D.rho ** 2) == pytest.approx(2 * math.pi, rel=1e-10)
