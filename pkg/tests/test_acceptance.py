"""End-to-end acceptance checks, one test per criterion."""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from cbmkit.geometry import CoStar, box, disc, make_grid, minkowski_sum, scale, star_fourier
from cbmkit.measures import (boundary_measure, cone_w0, homogeneous_measure, measure_of_costar, measure_of_star,
                             warped_measure)
from cbmkit.onedim import (IntervalUnion, equality_shape_1d, ocbm_1d, power_exp_law, power_law,
                           random_interval_union)
from cbmkit.oracle import complement_mass, tight_voxelize, voxel_boundary, voxel_measure, voxel_minkowski, voxelize
from cbmkit.sobolev import RadialFunction, check_sobolev
from cbmkit.verifiers import (bonnesen_concavity, cbm_battery, check_iso_warped, check_isoperimetry,
                              check_ocbm_nd, closure_suite, equality_diagnostics, profile_search, random_convex)

TWO_PI = 2 * math.pi
PHI_EXP = lambda t: t ** -2 * math.exp(1 / t)


@pytest.fixture(scope="module")
def grid():
    return make_grid(2, 4096)


@pytest.fixture(scope="module")
def inv_cube_mu(grid):
    return homogeneous_measure(1.0, -1 / 3, grid)


@pytest.fixture(scope="module")
def exp_warped(grid):
    return warped_measure(1.0, disc(grid, 1.0), power_exp_law())


def test_negative_exponent_sharpness(inv_cube_mu, grid, record):
    t0 = time.perf_counter()
    K = disc(grid, 1.0)
    worst = 0.0
    for t in (0.5, 1.0, 2.0, 4.0):
        r = check_isoperimetry(inv_cube_mu, K, CoStar(scale(K, t)), -1.0, tol=1e-9)
        worst = max(worst, abs(r.lhs - r.rhs) / r.rhs, abs(r.lhs - TWO_PI / t ** 2) / (TWO_PI / t ** 2))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 1.0
    record(1, "negative-q isoperimetric sharpness", ok, f"worst rel {worst:.1e}, {dt:.2f}s")
    assert ok


@pytest.mark.slow
def test_complemented_bm_battery(record):
    t0 = time.perf_counter()
    g2, g3 = make_grid(2, 4096), make_grid(3, 8192)
    runs = []
    for p, g, count, seed in ((-1 / 3, g2, 3400, 1), (-1 / 5, g2, 3300, 2), (-1 / 4, g3, 3300, 3)):
        mu = homogeneous_measure(1.0, p, g)
        runs.append(cbm_battery(mu, mu.q, count, seed=seed))
    dt = time.perf_counter() - t0
    total = sum(r.instances for r in runs)
    bad = sum(r.violations for r in runs)
    paths = {}
    for r in runs:
        for k, v in r.paths.items():
            paths[k] = paths.get(k, 0) + v
    ok = total >= 10_000 and bad == 0 and dt < 300
    record(2, "q-CBM random battery", ok, f"{total} instances, {bad} violations, paths {paths}, {dt:.0f}s")
    assert ok, [f for r in runs for f in r.failures]


def test_one_dimensional_ocbm(record):
    law = power_law(2.0)
    a = ocbm_1d(law, IntervalUnion.of((0, 2)), 1, 3)
    b = ocbm_1d(law, IntervalUnion.of((0, 1), (2, 3)), 1, 1)
    exact = (abs(a.lhs - 0.2) <= 4e-16 and abs(a.rhs - 0.2) <= 4e-16
             and abs(b.lhs - 0.25) <= 4e-16 and abs(b.rhs - 5 / 11) <= 4e-16 * 5 / 11 * 4)
    rng = np.random.default_rng(2024)
    laws = [law, power_exp_law(), power_law(3.0)]
    bad = 0
    for i in range(10_000):
        A = random_interval_union(rng, int(rng.integers(1, 6)))
        r = ocbm_1d(laws[i % 3], A, float(rng.uniform(0.05, 4)), float(rng.uniform(0, 4)), tol=1e-10)
        bad += not r.passed
    ok = exact and bad == 0
    record(3, "1-D OCBM", ok, f"exact fractions {'ok' if exact else 'off'}, {bad}/10000 violations")
    assert ok


def test_warped_equality(exp_warped, grid, record):
    B = disc(grid, 1.0)
    worst = 0.0
    for t in (1.0, 2.0):
        r = check_iso_warped(exp_warped, B, CoStar(scale(B, t)), tol=1e-9)
        want = TWO_PI * PHI_EXP(t)
        worst = max(worst, abs(r.lhs - r.rhs) / r.rhs, abs(r.lhs - want) / want)
    for a, bb, t in ((2.0, 1.0, 1.0), (1.5, 1.0, 0.5), (3.0, 1.0, 2.0)):
        r = check_ocbm_nd(exp_warped, scale(B, a), scale(B, bb), t, tol=1e-9)
        worst = max(worst, abs(r.lhs - r.rhs) / r.rhs)
    ok = worst <= 1e-9
    record(4, "warped isoperimetric and OCBM equality", ok, f"worst rel {worst:.1e}")
    assert ok


def test_equality_diagnostics(inv_cube_mu, exp_warped, grid, record):
    K = disc(grid, 1.0)
    resid = []
    for t in (0.5, 1.0, 2.0, 4.0):
        resid.append(equality_diagnostics(scale(K, t), K).homothety_residual)
    for t in (1.0, 2.0):
        resid.append(equality_diagnostics(scale(K, t), K).homothety_residual)
    resid.append(equality_diagnostics(disc(grid, 2.0), disc(grid, 1.0)).homothety_residual)
    law = power_law(2.0)
    half = equality_shape_1d(law, IntervalUnion.of((0, 2)).complement(), 1)
    equal_ok = max(resid) <= 1e-6 and half.is_halfline and half.equality
    rng = np.random.default_rng(77)
    weak = 0
    for i in range(100):
        noise = float(rng.uniform(0.05, 0.2))
        deg = int(rng.integers(2, 6))
        ca = np.zeros(deg)
        ca[deg - 1] = noise * rng.choice([-1, 1])
        sa = rng.uniform(-0.3, 0.3, deg) * noise
        S = star_fourier(grid, 1.0, ca, sa)
        d = equality_diagnostics(S, K)
        mu, chk = (inv_cube_mu, "iso") if i % 2 == 0 else (exp_warped, "warped")
        if chk == "iso":
            r = check_isoperimetry(mu, K, CoStar(S), -1.0)
        else:
            r = check_iso_warped(mu, K, CoStar(S))
        if not (d.homothety_residual > 1e-3 and r.slack > 0 and r.passed):
            weak += 1
    ok = equal_ok and weak == 0
    record(5, "equality diagnostics", ok,
           f"max equality residual {max(resid):.1e}, half-line {half.is_halfline}, {weak}/100 perturbed misses")
    assert ok


def test_positive_exponent_side(grid, record):
    leb = homogeneous_measure(1.0, math.inf, grid)
    quad_mu = homogeneous_measure(cone_w0(2, math.pi / 4, axis=math.pi / 4), math.inf, grid)
    K = disc(grid, 1.0)
    worst = 0.0
    for mu in (leb, quad_mu):
        for t in (0.5, 1.0, 2.0):
            r = check_isoperimetry(mu, K, scale(K, t), 0.5, tol=1e-9)
            worst = max(worst, abs(r.slack) / r.lhs)
    aff = max(bonnesen_concavity(leb, scale(K, a), scale(K, b), 0.5).affinity_defect
              for a, b in ((1, 2), (0.5, 3), (1, 1)))
    rng = np.random.default_rng(31)
    conc = math.inf
    for _ in range(1000):
        conc = min(conc, bonnesen_concavity(leb, random_convex(grid, rng), random_convex(grid, rng), 0.5,
                                            steps=9).concavity_defect)
    ok = worst <= 1e-9 and aff <= 1e-9 and conc >= -1e-9
    record(6, "positive-q equality and concavity", ok,
           f"equality rel {worst:.1e}, affinity {aff:.1e}, min concavity {conc:.1e}")
    assert ok


@pytest.mark.slow
def test_oracle_consistency(grid, record):
    h = 1 / 256
    leb = homogeneous_measure(1.0, math.inf, grid)
    inv_cube_mu = homogeneous_measure(1.0, -1 / 3, grid)
    D, Sq = disc(grid, 1.0), box(grid, [-1, -1], [1, 1])
    bodies = [D, Sq, box(grid, [-1, -0.5], [0.7, 1.2]), disc(grid, 0.8, [0.3, -0.2]),
              star_fourier(grid, 1.0, [0.1, 0.15], [0.05])]
    issues = []
    for A in bodies:
        V = voxelize(A, 4.0, h)
        a = measure_of_star(leb, A)
        band = max(1e-3 * a, 4 * h * TWO_PI * 1.5)
        if abs(voxel_measure(leb, V).value - a) > band:
            issues.append("star mass")
        c = measure_of_costar(inv_cube_mu, CoStar(A))
        if abs(complement_mass(inv_cube_mu, V, 4.0) - c) > max(1e-3 * c, 4 * h * TWO_PI * 1.5):
            issues.append("complement mass")
    for A, B in ((D, Sq), (D, disc(grid, 2.0)), (Sq, box(grid, [-0.5, -1], [1, 0.5]))):
        S = voxel_minkowski(tight_voxelize(A, h), tight_voxelize(B, h))
        exact = minkowski_sum(A, B).volume()
        if abs(S.area() - exact) > max(1e-3 * exact, 4 * h * TWO_PI * 3):
            issues.append("sum area")
    steiner = voxel_minkowski(tight_voxelize(D, h), tight_voxelize(Sq, h)).area()
    steiner_err = abs(steiner - (12 + math.pi)) / (12 + math.pi)
    cases = ((leb, D, D, "outer"), (leb, box(grid, [0, 0], [1, 1]), Sq, "outer"), (inv_cube_mu, CoStar(D), D, "inner"))
    for mu, A, K, side in cases:
        exact = boundary_measure(mu, A, K)
        kw = {"window": 4.0} if side == "inner" else {}
        est = voxel_boundary(mu, A, K, side=side, h=h, **kw).value
        if abs(est - exact) > 2e-2 * exact:
            issues.append(f"boundary {side}")
    ok = not issues and steiner_err <= 1e-2
    record(7, "oracle consistency", ok, f"Steiner rel err {steiner_err:.1e}, issues {issues}")
    assert ok


def frozen_beta_rhs():
    """Constant C1 ((alpha-beta)/alpha)^{1/beta} times the L^{1/4} norm, by independent quadrature."""
    inner, _ = quad(lambda r: (r - 1) ** 0.25 / r ** 2, 1, 2, epsabs=1e-14, limit=200)
    norm = (TWO_PI * (inner + 0.5)) ** 4
    return norm / TWO_PI / 16


def test_sobolev_suite(inv_cube_mu, grid, record):
    f = RadialFunction(disc(grid, 1.0), (0.0, 1.0, 2.0), (0.0, 0.0, 1.0))
    w = check_sobolev(f, inv_cube_mu, "weak_L1", tol=1e-6)
    n = check_sobolev(f, inv_cube_mu, "nash", tol=1e-6)
    c = check_sobolev(f, inv_cube_mu, "coarea", tol=1e-6)
    b = check_sobolev(f, inv_cube_mu, "L_beta", beta=0.25)
    ok = (w.passed and abs(w.lhs - math.pi) <= 1e-6 * math.pi and abs(w.rhs - math.pi) <= 1e-6 * math.pi
          and n.passed and abs(n.slack - (math.pi * math.sqrt(2) - TWO_PI * math.log(2))) <= 1e-4
          and abs(n.slack - 0.0877) <= 1e-4
          and c.passed and all(c.witness["links"])
          and b.mode == "diagnostic" and abs(b.lhs - math.pi) <= 1e-4
          and abs(b.rhs - frozen_beta_rhs()) <= 0.02 * frozen_beta_rhs())
    record(8, "Sobolev suite", ok,
           f"weak_L1 {w.lhs:.6f}={w.rhs:.6f}, nash slack {n.slack:.4f}, coarea links {c.witness['links']}, "
           f"L_beta diagnostic {b.lhs:.4f} vs {b.rhs:.4f} ({'pass' if b.passed else 'fail'}, not asserted)")
    assert ok


@pytest.mark.slow
def test_closure_batteries(grid, record):
    w = lambda d: 1.0 + 0.5 * d[:, 0] ** 2
    rot = lambda d: 1.0 + 0.5 * d[:, 1] ** 2
    mus = [homogeneous_measure(w, -1 / 3, grid), homogeneous_measure(rot, -1 / 3, grid)]
    neg = closure_suite(mus, [0.5, 0.5], [[2.0, 0.3], [0.0, 1.0]], -1.0, -0.5, count=1000, seed=4)
    leb = homogeneous_measure(1.0, math.inf, grid)
    pos = closure_suite([leb, leb], [0.5, 0.5], [[2.0, 0.0], [0.0, 1.0]], 0.5, 0.25, count=1000, seed=5)
    results = {f"neg_{k}": v for k, v in neg.items()} | {f"pos_{k}": v for k, v in pos.items()}
    ok = all(r.passed and r.instances == 1000 for r in results.values())
    record(9, "closure batteries", ok, ", ".join(f"{k} {r.violations}/{r.instances}" for k, r in results.items()))
    assert ok


def test_minimizer_search(inv_cube_mu, grid, record):
    K = disc(grid, 1.0)
    details, ok = [], True
    for v in (math.pi, TWO_PI):
        r = profile_search(inv_cube_mu, K, v, degree=3, seed=0)
        ok &= (-1e-9 * r.bound <= r.gap <= 1e-3 * r.bound and r.fourier_tail < 1e-2 and r.seconds < 60
               and np.ptp(r.rho) / np.mean(r.rho) < 1e-2)
        details.append(f"v={v:.4f}: gap {r.gap:.1e}, tail {r.fourier_tail:.1e}, {r.seconds:.1f}s")
    record(10, "minimizer search", ok, "; ".join(details))
    assert ok
