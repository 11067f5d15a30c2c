"""Inequality checkers, equality-case diagnostics and randomized batteries."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull

from .exponents import exponent, power_mean
from .geometry import (Body, CoStar, ConvexBody, StarBody, box, disc, minkowski_sum, polygon,
                       radial_sum, scale, star_fourier)
from .measures import (DisintegratedMeasure, MixtureMeasure, PushforwardMeasure, boundary_measure,
                       complement_mass, measure_of_costar, measure_of_star, rebase)
from .report import IneqReport

__all__ = [
    "IneqReport", "check_bm", "check_cbm", "check_isoperimetry", "check_ocbm_nd", "check_iso_warped",
    "bonnesen_concavity", "equality_diagnostics", "closure_suite", "profile_search",
    "random_convex", "random_star_body", "cbm_battery",
]

ANALYTIC_TOL = 1e-6
VOXEL_TOL = 1e-3
VOXEL_H = 1.0 / 128


def _describe(body) -> dict:
    if isinstance(body, CoStar):
        return {"costar_of": _describe(body.inner)}
    if isinstance(body, ConvexBody):
        return {"kind": body.kind, "core": body.core.tolist(), "r": body.r}
    if isinstance(body, StarBody):
        return {"kind": "star", "label": body.label, "rho_mean": float(np.mean(body.rho))}
    return {"kind": type(body).__name__}


def _measure_q(mu) -> Optional[float]:
    return getattr(mu, "q", None)


# ---------------------------------------------------------------- q-concavity


def check_bm(mu, A: ConvexBody, B: ConvexBody, lam: float, q: float, tol: float = ANALYTIC_TOL) -> IneqReport:
    """mu(lam A + (1-lam) B) >= M_q(mu(A), mu(B); lam)."""
    q = exponent(q)
    a, b = measure_of_star(mu, A), measure_of_star(mu, B)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("check_bm needs finite masses")
    if a == 0 or b == 0:
        raise ValueError("check_bm needs nonzero masses")
    S = minkowski_sum(A, B, lam, 1.0 - lam)
    lhs = measure_of_star(mu, S)
    rhs = power_mean(a, b, lam, q)
    return IneqReport("bm", lhs, rhs, ">=", tol, check="check_bm",
                      witness={"lambda": lam, "q": q, "A": _describe(A), "B": _describe(B), "mu_A": a, "mu_B": b})


def _one_sided_1d(mu) -> Optional[int]:
    """Index of the single supported direction for a half-line measure in n=1."""
    if not isinstance(mu, DisintegratedMeasure) or mu.n != 1:
        return None
    supp = np.nonzero(mu.eta > 0)[0]
    return int(supp[0]) if len(supp) == 1 else None


def _sum_complement(mu, A, B, wa: float, wb: float, h: float, dump: Optional[str] = None):
    """mu(R^n minus (wa A + wb B)) and the path used."""
    costars = isinstance(A, CoStar), isinstance(B, CoStar)
    if any(costars):
        if not all(costars):
            raise ValueError("mixing a co-star with a bounded body is not supported")
        side = _one_sided_1d(mu)
        if side is not None:
            # on a half-line the two tails add like their inner radii
            rA, rB = A.inner.rho_on(mu.grid), B.inner.rho_on(mu.grid)
            rho = np.zeros(mu.grid.size)
            rho[side] = wa * rA[side] + wb * rB[side]
            return mu.star_mass(rho), "half_line"
        # two unbounded complements of bounded sets fill space
        return 0.0, "costar_sum"
    if isinstance(A, ConvexBody) and isinstance(B, ConvexBody):
        return complement_mass(mu, minkowski_sum(A, B, wa, wb)), "closed_form"
    if A.n == 2:
        from .oracle import star_sum_complement_mass
        return star_sum_complement_mass(mu, A, B, wa, wb, h=h, dump=dump)["value"], "voxel"
    # the radial combination is a subset of the Minkowski combination
    return complement_mass(mu, radial_sum(scale(A, wa), scale(B, wb))), "radial_subset"


def check_cbm(mu, A, B, lam: float, q: float, tol: Optional[float] = None, h: float = VOXEL_H,
              dump: Optional[str] = None) -> IneqReport:
    """mu(R^n minus (lam A + (1-lam) B)) <= M_q(mu(R^n minus A), mu(R^n minus B); lam).

    ``A`` and ``B`` are star bodies (their complements are measured) or
    co-stars, whose complements are the inner star sets.
    """
    q = exponent(q)
    a = measure_of_star(mu, A.inner) if isinstance(A, CoStar) else complement_mass(mu, A)
    b = measure_of_star(mu, B.inner) if isinstance(B, CoStar) else complement_mass(mu, B)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("complement masses must be finite")
    lhs, path = _sum_complement(mu, A, B, lam, 1.0 - lam, h, dump)
    rhs = power_mean(a, b, lam, q)
    if tol is None:
        tol = VOXEL_TOL if path == "voxel" else ANALYTIC_TOL
    return IneqReport("cbm", lhs, rhs, "<=", tol, path=path, check="check_cbm",
                      witness={"lambda": lam, "q": q, "A": _describe(A), "B": _describe(B),
                               "mu_cA": a, "mu_cB": b})


# ---------------------------------------------------------------- isoperimetry


def check_isoperimetry(mu, K: ConvexBody, S, q: float, tol: float = ANALYTIC_TOL, mode: str = "auto") -> IneqReport:
    """Boundary measure against the power-type lower bound.

    q > 0: S a star body, bound (1/q) mu(K)^q mu(S)^{1-q}.
    q < 0: S a co-star, bound -(1/q) mu(R^n minus K)^q mu(S)^{1-q}.
    """
    q = exponent(q)
    if q > 0:
        if isinstance(S, CoStar):
            raise ValueError("q > 0 needs a star set of finite mass")
        v = measure_of_star(mu, S)
        rhs = (1.0 / q) * measure_of_star(mu, K) ** q * v ** (1.0 - q)
    elif q < 0:
        if not isinstance(S, CoStar):
            raise ValueError("q < 0 needs a co-star")
        v = measure_of_costar(mu, S)
        mk = complement_mass(mu, K)
        if not math.isfinite(mk):
            raise ValueError("mu(R^n minus K) must be finite")
        rhs = -(1.0 / q) * mk ** q * v ** (1.0 - q)
    else:
        raise ValueError("q = 0 has no isoperimetric branch here")
    if not math.isfinite(v):
        raise ValueError("the set must have finite mass")
    est = boundary_measure(mu, S, K, mode=mode, detail=True)
    return IneqReport("isoperimetry", est.value, rhs, ">=", tol, path=est.mode, check="check_isoperimetry",
                      witness={"q": q, "K": _describe(K), "S": _describe(S), "mass": v})


def _frame(mu, B: Body) -> DisintegratedMeasure:
    """The measure disintegrated along rays of B (B must be its body up to scaling)."""
    if isinstance(mu, DisintegratedMeasure) and mu.kind == "homogeneous":
        return rebase(mu, B)
    if isinstance(mu, DisintegratedMeasure) and mu.kind == "warped":
        ratio = B.rho_on(mu.grid) / mu.scale
        s = float(np.median(ratio))
        if np.max(np.abs(ratio - s)) > 1e-9 * s:
            raise ValueError("B must be a scaled copy of the warping body")
        return mu
    raise TypeError("needs a homogeneous or warped disintegrated measure")


def check_ocbm_nd(mu, A: Body, B: Body, t: float, tol: Optional[float] = None, h: float = VOXEL_H,
                  dump: Optional[str] = None) -> IneqReport:
    """mu(R^n minus (A + tB)) <= Phi(Phi^{-1}(mu(R^n minus A)) + t Phi^{-1}(mu(R^n minus B)))."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    nu = _frame(mu, B)
    law = nu.normalized_law
    notes = []
    if not law.log_convex:
        notes.append("warning: radial law is not flagged log-convex; the inequality may fail")
    a = complement_mass(mu, A)
    b = complement_mass(mu, B)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("complement masses must be finite")
    if t == 0:
        lhs, path = a, "closed_form"
    else:
        lhs, path = _sum_complement(mu, A, B, 1.0, t, h, dump)
    rhs = float(law.Phi(np.array([float(law.Phi_inv(a)) + t * float(law.Phi_inv(b))]))[0])
    if tol is None:
        tol = VOXEL_TOL if path == "voxel" else ANALYTIC_TOL
    return IneqReport("ocbm", lhs, rhs, "<=", tol, path=path, notes=notes, check="check_ocbm_nd",
                      witness={"t": t, "A": _describe(A), "B": _describe(B), "mu_cA": a, "mu_cB": b})


def check_iso_warped(mu, B: Body, C: CoStar, tol: float = ANALYTIC_TOL) -> IneqReport:
    """B-boundary of the co-star C against the normalized profile phi_hat(Phi_hat^{-1}(mu(C)))."""
    if not isinstance(C, CoStar):
        raise TypeError("C must be a co-star")
    nu = _frame(mu, B)
    law = nu.normalized_law
    v = measure_of_costar(mu, C)
    if not math.isfinite(v):
        raise ValueError("mu(C) must be finite")
    est = boundary_measure(nu, C, B, detail=True)
    x = float(law.Phi_inv(v))
    rhs = float(law.density(np.array([x]))[0])
    return IneqReport("iso_warped", est.value, rhs, ">=", tol, path=est.mode, check="check_iso_warped",
                      witness={"B": _describe(B), "C": _describe(C), "mass": v})


# ---------------------------------------------------------------- concavity along segments


@dataclass
class BonnesenResult:
    ts: list
    psi: list
    concavity_defect: float
    affinity_defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.concavity_defect >= -self.tol

    def to_report(self, name: str = "bonnesen") -> IneqReport:
        # defects are already relative, so the tolerance is absolute
        return IneqReport(name, self.concavity_defect, -self.tol, ">=", 0.0, check="bonnesen_concavity",
                          witness={"affinity_defect": self.affinity_defect, "ts": self.ts, "psi": self.psi})


def bonnesen_concavity(mu, A: ConvexBody, B: ConvexBody, q: float, steps: int = 21,
                       tol: float = 1e-9) -> BonnesenResult:
    """Sample Psi(t) = mu((1-t)A + tB)^q; report concavity and affinity defects (relative)."""
    q = exponent(q)
    if not q > 0:
        raise ValueError("needs q > 0")
    ts = np.linspace(0.0, 1.0, steps)
    psi = np.empty(steps)
    for i, t in enumerate(ts):
        if t == 0:
            S = A
        elif t == 1:
            S = B
        else:
            S = minkowski_sum(A, B, 1.0 - t, t)
        m = measure_of_star(mu, S)
        if not math.isfinite(m):
            raise ValueError("masses must be finite")
        psi[i] = m ** q
    sc = max(float(np.max(np.abs(psi))), 1e-300)
    chord = psi[0] + ts * (psi[-1] - psi[0])
    conc = min(float(np.min(psi - chord)), float(np.min(psi[1:-1] - 0.5 * (psi[:-2] + psi[2:]))) if steps > 2 else 0.0)
    aff = float(np.max(np.abs(psi - chord)))
    return BonnesenResult(ts.tolist(), psi.tolist(), conc / sc, aff / sc, tol)


# ---------------------------------------------------------------- equality cases


@dataclass
class EqualityDiagnosis:
    ratio: float
    homothety_residual: float
    convexity_deficit: float
    shift: Optional[list] = None
    tol: float = 1e-6

    @property
    def homothetic(self) -> bool:
        return self.homothety_residual <= self.tol


def _convexity_deficit(body: Body) -> float:
    if body.n != 2:
        return 0.0
    if isinstance(body, ConvexBody):
        return 0.0
    g = body.grid
    r = body.rho_on(g)
    P = r[:, None] * g.directions
    order = np.argsort(np.arctan2(g.directions[:, 1], g.directions[:, 0]))
    P = P[order]
    x, y = P[:, 0], P[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    hull = ConvexHull(P).volume
    return float((hull - area) / hull)


def equality_diagnostics(A: Body, B: Body, eta_support=None, translation_search: bool = False,
                         tol: float = 1e-6) -> EqualityDiagnosis:
    """How far A is from a homothet mB (or mB + b with translation_search)."""
    grid = A.grid
    if translation_search:
        if not (isinstance(A, ConvexBody) and isinstance(B, ConvexBody)):
            raise TypeError("translation search compares support functions of convex bodies")
        u = grid.directions
        hA, hB = A.support(u), B.support(u)
        M = np.column_stack([hB, u])
        coef, *_ = np.linalg.lstsq(M, hA, rcond=None)
        m, b = float(coef[0]), coef[1:]
        width = float(np.mean(hA + A.support(-u))) / 2
        resid = float(np.mean(np.abs(hA - M @ coef))) / max(width, 1e-300)
        return EqualityDiagnosis(m, resid, 0.0, b.tolist(), tol)
    mask = np.ones(grid.size, dtype=bool) if eta_support is None else np.asarray(eta_support) > 0
    w = grid.weights if eta_support is None or np.asarray(eta_support).dtype == bool else np.asarray(eta_support)
    rA, rB = A.rho_on(grid)[mask], B.rho_on(grid)[mask]
    w = np.asarray(w, dtype=float)[mask]
    if np.any(rA <= 0) or np.any(rB <= 0):
        raise ValueError("radial functions must be positive on the support")
    m = float(np.median(rA / rB))
    resid = float(np.dot(w, np.abs(rA - m * rB)) / np.dot(w, m * rB))
    return EqualityDiagnosis(m, resid, max(_convexity_deficit(A), _convexity_deficit(B)), None, tol)


# ---------------------------------------------------------------- random bodies


def random_convex(grid, rng: np.random.Generator, kind: Optional[str] = None) -> ConvexBody:
    """Random convex body with the origin well inside."""
    n = grid.n
    kinds = ["disc", "box", "polygon", "rounded"] if n == 2 else ["box", "rounded"]
    kind = kind or kinds[rng.integers(len(kinds))]
    if kind == "disc":
        c = rng.uniform(-0.3, 0.3, 2)
        return disc(grid, float(rng.uniform(0.6, 2.0)), c)
    if kind == "box":
        return box(grid, -rng.uniform(0.4, 1.5, n), rng.uniform(0.4, 1.5, n))
    if kind == "polygon":
        k = int(rng.integers(3, 9))
        th = np.sort(rng.uniform(0, 2 * np.pi, k))
        th = th + np.linspace(0, 0, k)
        pts = np.column_stack([np.cos(th), np.sin(th)]) * rng.uniform(0.6, 2.0, (k, 1))
        pts = np.vstack([pts, 0.5 * np.array([[1, 0], [0, 1], [-1, 0], [0, -1]])])
        hull = ConvexHull(pts)
        return polygon(grid, pts[hull.vertices])
    if kind == "rounded":
        B = box(grid, -rng.uniform(0.2, 1.2, n), rng.uniform(0.2, 1.2, n))
        return ConvexBody(grid, B.core, float(rng.uniform(0.05, 0.8)), "convex")
    raise ValueError(f"unknown kind {kind}")


def random_star_body(grid, rng: np.random.Generator, noise: float = 0.25, degree: int = 5) -> StarBody:
    k = np.arange(1, degree + 1)
    a = rng.uniform(-1, 1, degree) * noise / k
    b = rng.uniform(-1, 1, degree) * noise / k
    return star_fourier(grid, float(rng.uniform(0.6, 1.8)), a, b)


@dataclass
class BatteryResult:
    name: str
    instances: int
    violations: int
    worst_relative_slack: float
    paths: dict
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _tally(name, reports: Sequence[IneqReport], t0: float) -> BatteryResult:
    paths: dict = {}
    worst = math.inf
    fails = []
    for r in reports:
        paths[r.path] = paths.get(r.path, 0) + 1
        worst = min(worst, r.relative_slack) if math.isfinite(r.relative_slack) else worst
        if not r.passed:
            fails.append(r.to_dict())
    return BatteryResult(name, len(reports), len(fails), worst, paths, fails[:20], time.perf_counter() - t0)


def cbm_battery(mu, q: float, count: int, seed: int = 0, star_fraction: float = 0.03,
                lambdas: Sequence[float] = (0.25, 0.5, 0.75), h: float = VOXEL_H) -> BatteryResult:
    """Random (A, B, lam) instances of check_cbm; a small share uses non-convex stars."""
    rng = np.random.default_rng(seed)
    grid = mu.grid
    reports = []
    t0 = time.perf_counter()
    n_star = int(round(star_fraction * count)) if grid.n == 2 else 0
    for i in range(count):
        lam = float(lambdas[i % len(lambdas)]) if i % 2 else float(rng.uniform(0.05, 0.95))
        if i < n_star:
            A = random_star_body(grid, rng)
            B = random_star_body(grid, rng) if i % 2 else random_convex(grid, rng)
        else:
            A = random_convex(grid, rng)
            B = scale(A, float(rng.uniform(0.3, 3.0))) if i % 10 == 0 else random_convex(grid, rng)
        reports.append(check_cbm(mu, A, B, lam, q, h=h))
    return _tally("cbm", reports, t0)


def probe_battery(grid, seed: int = 0):
    """Fixed probe pairs: homothets, rotated copies and disc/box/polygon mixes at three scales."""
    rng = np.random.default_rng(seed)
    D = disc(grid, 1.0)
    S = box(grid, [-1.0, -1.0], [1.0, 1.0]) if grid.n == 2 else box(grid, -np.ones(grid.n), np.ones(grid.n))
    pairs = []
    for s in (0.5, 1.0, 2.0):
        if grid.n == 2:
            P = random_convex(grid, rng, "polygon")
            R = polygon(grid, S.core @ np.array([[math.cos(0.4), math.sin(0.4)], [-math.sin(0.4), math.cos(0.4)]]))
            pairs += [(D, scale(D, 3 * s)), (scale(D, s), S), (S, scale(R, s)), (P, scale(D, s)), (scale(P, s), S)]
        else:
            pairs += [(S, scale(S, 2 * s)), (scale(S, s), random_convex(grid, rng))]
    return pairs


def _battery_reports(mu, q, pairs, lambdas=(0.25, 0.5, 0.75)):
    return [check_cbm(mu, A, B, lam, q) for A, B in pairs for lam in lambdas]


def closure_suite(mus: Sequence, weights: Sequence[float], T, q: float, q_prime: Optional[float] = None,
                  count: int = 0, seed: int = 0) -> dict:
    """Mixture, linear pushforward and exponent-monotonicity batteries.

    Negative q runs check_cbm on the probe pairs, positive q runs check_bm.

    With ``count`` > 0 each battery uses that many random convex pairs;
    otherwise the fixed probe battery.
    """
    q = exponent(q)
    grid = mus[0].grid
    # upper bounds weaken as the exponent grows, lower bounds as it shrinks
    if q_prime is None:
        q_prime = q / 2
    if q < 0 and not q_prime > q:
        raise ValueError("for q < 0 the comparison exponent must exceed q")
    if q > 0 and not q_prime < q:
        raise ValueError("for q > 0 the comparison exponent must be below q")
    if count > 0:
        rng = np.random.default_rng(seed)
        pairs = [(random_convex(grid, rng), random_convex(grid, rng)) for _ in range(count)]
        lambdas = [float(rng.uniform(0.05, 0.95)) for _ in range(count)]
        instances = list(zip(pairs, lambdas))
    else:
        instances = [(p, lam) for p in probe_battery(grid, seed) for lam in (0.25, 0.5, 0.75)]
    mix = MixtureMeasure(tuple(mus), tuple(float(w) for w in weights))
    T = np.asarray(T, dtype=float)
    if abs(np.linalg.det(T)) < 1e-14:
        raise ValueError("pushforward map must be invertible")
    push = PushforwardMeasure(mus[0], T)
    # for q > 0 complements have infinite mass; concavity is tested on the sets themselves
    checker = check_bm if q > 0 else check_cbm
    out = {}
    for name, nu, qq in (("mixture", mix, q), ("pushforward", push, q), ("monotonicity", mus[0], q_prime)):
        t0 = time.perf_counter()
        reps = [checker(nu, A, B, lam, qq) for (A, B), lam in instances]
        for r in reps:
            r.check = f"closure_{name}"
        out[name] = _tally(name, reps, t0)
    return out


# ---------------------------------------------------------------- minimizer search


@dataclass
class ProfileResult:
    best: float
    bound: float
    gap: float
    rho: np.ndarray
    coefficients: list
    fourier_tail: float
    mean_radius: float
    converged: bool
    flagged: bool
    evaluations: int
    seconds: float

    def to_report(self, v: float, tol: float) -> IneqReport:
        return IneqReport("profile_gap", self.gap, tol, "<=", 0.0, path="perimeter", check="profile_search",
                          witness={"v": v, "best": self.best, "bound": self.bound,
                                   "fourier_tail": self.fourier_tail, "mean_radius": self.mean_radius,
                                   "coefficients": self.coefficients})


def profile_search(mu, K: ConvexBody, v: float, degree: int = 3, budget: int = 400, seed: int = 0,
                   start_noise: float = 0.1) -> ProfileResult:
    """Minimize the inner boundary measure over co-stars of mass v.

    Co-stars have log rho equal to a trigonometric polynomial of the given
    degree; the mass constraint is met by rescaling, using homogeneity.
    """
    q = _measure_q(mu)
    if q is None or not q < 0:
        raise ValueError("profile search needs a q-homogeneous measure with q < 0")
    if not (0 < v < math.inf):
        raise ValueError("target mass must be positive and finite")
    grid = mu.grid
    if grid.n != 2:
        raise ValueError("profile search is planar")
    t0 = time.perf_counter()

    def build(x):
        a, b = x[:degree], x[degree:]
        S = star_fourier(grid, 0.0, a, b, log=True)
        m0 = measure_of_costar(mu, CoStar(S))
        lam = (v / m0) ** q
        return scale(S, lam)

    def objective(x):
        return boundary_measure(mu, CoStar(build(x)), K, mode="perimeter")

    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-start_noise, start_noise, 2 * degree)
    if degree == 0:
        res_x, converged, nfev = x0, True, 1
    else:
        res = minimize(objective, x0, method="BFGS", options={"maxiter": budget, "gtol": 1e-7})
        res_x, converged, nfev = res.x, bool(res.success), int(res.nfev)
    S = build(res_x)
    best = boundary_measure(mu, CoStar(S), K)
    bound = -(1.0 / q) * complement_mass(mu, K) ** q * v ** (1.0 - q)
    rho = S.rho
    tail = float(np.sqrt(np.sum(np.asarray(res_x) ** 2)))
    gap = best - bound
    return ProfileResult(best, bound, gap, rho, np.asarray(res_x).tolist(), tail, float(np.mean(rho)), converged,
                         (not converged) and gap > 1e-3 * abs(bound), nfev, time.perf_counter() - t0)
