"""Measures given by polar disintegration, and their set and boundary masses.

A measure here is ``sum_i eta_i * (law on the ray theta_i, stretched by
s_i)``: along direction theta_i the radial density is phi(r/s_i)/s_i, so the
mass beyond radius r is eta_i * Phi(r/s_i). Homogeneous measures use
phi(r) = r^{1/q-1} and s_i = 1; warped measures use the radial function of
a star body for s_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exponents import POS_INF, dual_exponent, exponent
from .geometry import (Body, CoStar, ConvexBody, DirectionGrid, GridMismatch, StarBody,
                       body_from_literal, linear_image, minkowski_sum, scale, star_fourier)
from .onedim import RadialLaw, law_from_literal, power_law
from .report import IneqReport


# ------------------------------------------------------------ angular weights


def constant_w0(c: float = 1.0) -> Callable:
    return lambda d: np.full(len(np.atleast_2d(d)), float(c))


def cone_w0(n: int, half_angle: float, axis=None, value: float = 1.0) -> Callable:
    """Indicator of a closed circular cone; boundary directions get half weight
    so that the equispaced n=2 rule integrates the cone exactly."""
    if n == 2:
        a = 0.0 if axis is None else float(axis)
        ax = np.array([math.cos(a), math.sin(a)])
    elif n == 1:
        ax = np.array([1.0 if axis is None or float(np.ravel([axis])[0]) >= 0 else -1.0])
    else:
        ax = np.array([0.0, 0.0, 1.0]) if axis is None else np.asarray(axis, dtype=float)
        ax = ax / np.linalg.norm(ax)

    def fn(d):
        d = np.atleast_2d(d)
        ang = np.arccos(np.clip(d @ ax, -1.0, 1.0))
        out = np.where(ang < half_angle - 1e-12, 1.0, 0.0)
        out = np.where(np.abs(ang - half_angle) <= 1e-12, 0.5, out)
        return value * out

    return fn


def w0_from_literal(lit, n: int) -> Callable:
    if lit is None:
        return constant_w0(1.0)
    if isinstance(lit, (int, float)):
        return constant_w0(float(lit))
    kind = lit.get("kind", "constant")
    if kind == "constant":
        return constant_w0(float(lit.get("value", 1.0)))
    if kind == "cone":
        return cone_w0(n, float(lit["half_angle"]), lit.get("axis"), float(lit.get("value", 1.0)))
    if kind == "fourier":
        if n != 2:
            raise ValueError("Fourier angular weights are planar")
        a0 = float(lit.get("a0", 1.0))
        a = np.asarray(lit.get("cos", []), dtype=float)
        b = np.asarray(lit.get("sin", []), dtype=float)
        rot = float(lit.get("rotate", 0.0))

        def fn(d):
            t = np.arctan2(np.atleast_2d(d)[:, 1], np.atleast_2d(d)[:, 0]) - rot
            ka, kb = np.arange(1, len(a) + 1), np.arange(1, len(b) + 1)
            return a0 + np.cos(np.outer(t, ka)) @ a + np.sin(np.outer(t, kb)) @ b

        return fn
    raise ValueError(f"unknown w0 kind {kind!r}")


def _as_w0_fn(w0, grid: DirectionGrid) -> tuple[Callable, np.ndarray]:
    if callable(w0):
        fn = w0
    elif isinstance(w0, dict) or w0 is None:
        fn = w0_from_literal(w0, grid.n)
    elif np.isscalar(w0):
        fn = constant_w0(float(w0))
    else:
        vals = np.asarray(w0, dtype=float)
        if vals.shape != (grid.size,):
            raise GridMismatch("w0 samples do not match the grid")
        probe = StarBody(grid, np.where(vals > 0, vals, 1.0), label="w0")
        fn = lambda d: np.where(probe.radial(d) > 0, probe.radial(d), 0.0)
        return fn, vals
    return fn, np.asarray(fn(grid.directions), dtype=float)


# ------------------------------------------------------------ measure types


@dataclass(frozen=True, eq=False)
class DisintegratedMeasure:
    grid: DirectionGrid
    eta: np.ndarray
    law: RadialLaw
    scale: np.ndarray
    kind: str = "homogeneous"
    p: Optional[float] = None
    q: Optional[float] = None
    w0_fn: Optional[Callable] = None
    body: Optional[Body] = None
    lebesgue_constant: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        if np.any(eta < 0) or not np.all(np.isfinite(eta)):
            raise ValueError("angular weights must be finite and nonnegative")
        if not np.any(eta > 0):
            raise ValueError("the zero measure is not allowed")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "scale", np.asarray(self.scale, dtype=float))

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def c_eta(self) -> float:
        return float(self.eta.sum())

    @property
    def normalized_law(self) -> RadialLaw:
        """phi_hat = c_eta * phi; pairs with the probability weights eta / c_eta."""
        return self.law.scaled(self.c_eta)

    @property
    def translation_invariant(self) -> bool:
        return self.lebesgue_constant is not None

    def scale_at(self, dirs) -> np.ndarray:
        if self.body is None:
            return np.ones(len(np.atleast_2d(dirs)))
        return self.body.radial(dirs)

    # -- masses -----------------------------------------------------------
    def _support(self):
        return self.eta > 0

    def costar_mass(self, rho: np.ndarray) -> float:
        m = self._support()
        return float(np.dot(self.eta[m], self.law.Phi(rho[m] / self.scale[m])))

    def star_mass(self, rho: np.ndarray) -> float:
        m = self._support()
        if self.law.origin_nonintegrable:
            return math.inf
        return float(np.dot(self.eta[m], self.law.head(rho[m] / self.scale[m])))

    def density(self, pts) -> np.ndarray:
        """Pointwise density w(x) of the measure with respect to Lebesgue measure."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.w0_fn is None:
            raise ValueError("this measure has no pointwise angular density")
        r = np.linalg.norm(pts, axis=1)
        out = np.zeros(len(pts))
        nz = r > 0
        d = pts[nz] / r[nz, None]
        s = self.scale_at(d)
        etad = self.w0_fn(d) * (s ** self.n if self.kind == "warped" else 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[nz] = etad * self.law.density(r[nz] / s) / (s * r[nz] ** (self.n - 1))
        if (~nz).any():
            out[~nz] = math.inf if self.law.origin_nonintegrable else 0.0
        return out

    def restrict(self, mask: np.ndarray) -> "DisintegratedMeasure":
        eta = np.where(mask, self.eta, 0.0)
        fn = self.w0_fn
        return DisintegratedMeasure(self.grid, eta, self.law, self.scale, self.kind, self.p, self.q,
                                    None if fn is None else fn, self.body, None, self.label + "|restricted")


@dataclass(frozen=True, eq=False)
class MixtureMeasure:
    """Weighted sum of measures sharing one direction grid."""

    components: tuple
    weights: tuple
    label: str = "mixture"

    def __post_init__(self):
        if not self.components:
            raise ValueError("empty mixture")
        g = self.components[0].grid
        for c in self.components:
            if c.grid != g:
                raise GridMismatch("mixture components must share a grid")
        if any(w < 0 for w in self.weights) or len(self.weights) != len(self.components):
            raise ValueError("mixture weights must be nonnegative, one per component")

    @property
    def grid(self):
        return self.components[0].grid

    @property
    def n(self):
        return self.grid.n

    @property
    def q(self):
        qs = {c.q for c in self.components}
        return qs.pop() if len(qs) == 1 else None

    translation_invariant = False

    def costar_mass(self, rho):
        return float(sum(w * c.costar_mass(rho) for w, c in zip(self.weights, self.components) if w > 0))

    def star_mass(self, rho):
        return float(sum(w * c.star_mass(rho) for w, c in zip(self.weights, self.components) if w > 0))

    def density(self, pts):
        return sum(w * c.density(pts) for w, c in zip(self.weights, self.components))


@dataclass(frozen=True, eq=False)
class PushforwardMeasure:
    """T_* mu, i.e. S -> mu(T^{-1} S), for an invertible linear T."""

    base: object
    T: np.ndarray
    label: str = "pushforward"

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        if T.shape != (self.base.n, self.base.n) or abs(np.linalg.det(T)) < 1e-14:
            raise ValueError("pushforward needs an invertible square matrix")
        object.__setattr__(self, "T", T)

    @property
    def grid(self):
        return self.base.grid

    @property
    def n(self):
        return self.base.n

    @property
    def q(self):
        return getattr(self.base, "q", None)

    translation_invariant = False

    @property
    def Tinv(self):
        return np.linalg.inv(self.T)

    def pullback(self, body):
        return linear_image(body, self.Tinv)

    def density(self, pts):
        pts = np.atleast_2d(pts)
        return self.base.density(pts @ self.Tinv.T) / abs(np.linalg.det(self.T))


# ------------------------------------------------------------ constructors


def homogeneous_measure(w0, p: float, grid: DirectionGrid) -> DisintegratedMeasure:
    """Measure with density w0(x/|x|) |x|^{1/p}; it is q-homogeneous for
    1/q = 1/p + n, with radial law r^{1/q - 1}.

    ``w0`` may be a constant, a callable on unit directions, a literal
    dict, or an array of per-direction values.
    """
    n = grid.n
    p = exponent(p)
    if p == 0.0:
        raise ValueError("p = 0 has no homogeneous-measure meaning")
    if not (p > 0 or (-1.0 / n < p < 0)):
        raise ValueError(f"p must lie in (-1/n, 0) or (0, inf]; got {p}")
    q = dual_exponent(p, n, homogeneous=True)
    fn, vals = _as_w0_fn(w0, grid)
    if np.any(vals < 0):
        raise ValueError("w0 must be nonnegative")
    eta = vals * grid.weights
    law = power_law(1.0 - 1.0 / q)
    leb = None
    if p == POS_INF and np.all(vals == vals[0]) and vals[0] > 0:
        leb = float(vals[0])
    return DisintegratedMeasure(grid, eta, law, np.ones(grid.size), "homogeneous", p, q, fn, None, leb,
                                f"homogeneous(p={p:g})")


def warped_measure(w0, B: Body, law: RadialLaw) -> DisintegratedMeasure:
    """Measure w0 |x|_B^{1-n} phi(|x|_B) dx disintegrated along rays of B."""
    grid = B.grid
    fn, vals = _as_w0_fn(w0, grid)
    rhoB = B.rho
    if not np.all(np.isfinite(rhoB)):
        raise ValueError("warping body must be bounded")
    eta = vals * rhoB ** grid.n * grid.weights
    if not np.isfinite(eta.sum()):
        raise ValueError("angular mass is infinite")
    if not law.nonincreasing:
        raise ValueError("warped measures need a non-increasing law")
    return DisintegratedMeasure(grid, eta, law, rhoB, "warped", None, None, fn, B, None, f"warped({law.name})")


def rebase(mu: DisintegratedMeasure, B: Body) -> DisintegratedMeasure:
    """Rewrite a homogeneous measure in the gauge frame of the star body B."""
    if mu.kind != "homogeneous" or mu.q is None:
        raise ValueError("only homogeneous measures can be re-disintegrated")
    rhoB = B.rho_on(mu.grid)
    eta = mu.eta * rhoB ** (1.0 / mu.q)
    return DisintegratedMeasure(mu.grid, eta, mu.law, rhoB, "homogeneous", mu.p, mu.q, None, B, None,
                                mu.label + "|rebased")


def measure_from_literal(lit: dict, grid: DirectionGrid):
    kind = lit.get("kind")
    if kind == "homogeneous":
        return homogeneous_measure(w0_from_literal(lit.get("w0"), grid.n), float(lit["p"]), grid)
    if kind == "warped":
        B = body_from_literal(lit.get("body", {"kind": "disc", "r": 1.0}), grid)
        return warped_measure(w0_from_literal(lit.get("w0"), grid.n), B, law_from_literal(lit["phi"]))
    if kind == "mixture":
        comps = tuple(measure_from_literal(c, grid) for c in lit["components"])
        return MixtureMeasure(comps, tuple(float(w) for w in lit["weights"]))
    raise ValueError(f"unknown measure kind {kind!r}")


# ------------------------------------------------------------ set masses


def _radii(body: Body, grid: DirectionGrid) -> np.ndarray:
    if isinstance(body, StarBody) and body.fn is None and body.grid != grid:
        raise GridMismatch("sampled star body and measure use different grids")
    return body.rho_on(grid)


def measure_of_star(mu, A: Body) -> float:
    """mu(A) for a star-shaped set A."""
    if isinstance(A, CoStar):
        raise TypeError("use measure_of_costar for complements")
    if isinstance(mu, PushforwardMeasure):
        return measure_of_star(mu.base, mu.pullback(A))
    if isinstance(mu, MixtureMeasure):
        return float(sum(w * measure_of_star(c, A) for w, c in zip(mu.weights, mu.components) if w > 0))
    if mu.translation_invariant and isinstance(A, ConvexBody):
        return mu.lebesgue_constant * A.volume()
    return mu.star_mass(_radii(A, mu.grid))


def measure_of_costar(mu, C) -> float:
    """mu(R^n minus inner) for a co-star C (a bare body is read as its inner set)."""
    inner = C.inner if isinstance(C, CoStar) else C
    if isinstance(mu, PushforwardMeasure):
        return measure_of_costar(mu.base, mu.pullback(inner))
    if isinstance(mu, MixtureMeasure):
        return float(sum(w * measure_of_costar(c, inner) for w, c in zip(mu.weights, mu.components) if w > 0))
    if not mu.law.tail_integrable:
        return math.inf
    return mu.costar_mass(_radii(inner, mu.grid))


def complement_mass(mu, A: Body) -> float:
    """mu(R^n minus A) for a star body A."""
    return measure_of_costar(mu, CoStar(A))


# ------------------------------------------------------------ boundary masses


@dataclass
class BoundaryEstimate:
    value: float
    mode: str
    residual: float = 0.0
    flagged: bool = False
    details: dict = field(default_factory=dict)


def homothety_factor(A: Body, K: Body, grid: DirectionGrid, tol: float = 1e-12) -> Optional[float]:
    """t with rho_A = t rho_K on the grid, or None."""
    try:
        ra, rk = A.rho_on(grid), K.rho_on(grid)
    except ValueError:
        return None
    ratio = ra / rk
    t = float(np.median(ratio))
    if np.all(np.abs(ratio - t) <= tol * t):
        return t
    return None


def _exact_boundary(mu: DisintegratedMeasure, K: Body, t: float) -> float:
    rk = K.rho_on(mu.grid)
    m = mu.eta > 0
    x = rk[m] / mu.scale[m]
    return float(np.dot(mu.eta[m], mu.law.density(t * x) * x))


def _perimeter_boundary(mu, A: Body, K: ConvexBody) -> float:
    """int_{boundary A} w h_K(nu) dl for planar A."""
    if isinstance(A, ConvexBody):
        pts, nrm, wts = A.boundary_pieces()
        return float(np.dot(mu.density(pts) * K.support(nrm), wts))
    if not isinstance(mu, DisintegratedMeasure):
        raise ValueError("perimeter mode on star bodies needs a disintegrated measure")
    g = mu.grid
    if not isinstance(A, StarBody):
        raise TypeError("perimeter mode needs a convex or star body")
    rho = A.rho_on(g) if A.fn is not None or A.grid == g else None
    if rho is None:
        raise GridMismatch("star body and measure use different grids")
    drho = A.with_grid(g).derivative_on_grid() if A.grid != g else A.derivative_on_grid()
    u = g.directions
    uperp = np.column_stack([-u[:, 1], u[:, 0]])
    normal = rho[:, None] * u - drho[:, None] * uperp
    m = mu.eta > 0
    s = mu.scale
    vals = mu.eta[m] * mu.law.density(rho[m] / s[m]) * K.support(normal[m]) / (s[m] * rho[m])
    return float(vals.sum())


def _numeric_boundary(mu, A: Body, K: ConvexBody, ks=range(4, 11)) -> BoundaryEstimate:
    if not isinstance(A, ConvexBody):
        from .oracle import analytic_star_boundary_estimate
        return analytic_star_boundary_estimate(mu, A, K)
    base_c = measure_of_costar(mu, CoStar(A))
    use_complement = math.isfinite(base_c)
    base = base_c if use_complement else measure_of_star(mu, A)
    eps = np.array([2.0 ** -k for k in ks])
    diffs = []
    for e in eps:
        grown = minkowski_sum(A, K, 1.0, e)
        if use_complement:
            diffs.append((base - measure_of_costar(mu, CoStar(grown))) / e)
        else:
            diffs.append((measure_of_star(mu, grown) - base) / e)
    diffs = np.array(diffs)
    V = np.vander(eps, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(V, diffs, rcond=None)
    fit = V @ coef
    resid = float(np.abs(fit - diffs).max() / max(abs(coef[0]), 1e-300))
    return BoundaryEstimate(float(coef[0]), "numeric", resid, resid > 1e-3,
                            {"eps": eps.tolist(), "quotients": diffs.tolist()})


def boundary_measure(mu, C, K: ConvexBody, side: str = "auto", mode: str = "auto",
                     detail: bool = False):
    """Boundary measure of C relative to the gauge body K.

    For a co-star C = R^n minus A this is the inner boundary measure of C,
    which equals the outer boundary measure of the star body A; a bare star
    body is measured on its outer side.

    Modes: ``exact`` (A a homothet tK, closed form -d/dt mu(R^n minus tK)),
    ``perimeter`` (planar regular sets, integral of w h_K(nu)),
    ``numeric`` (finite differences over eps = 2^-k, extrapolated to 0).
    """
    if isinstance(C, CoStar):
        A = C.inner
        if side == "outer":
            raise ValueError("a co-star is measured on its inner side")
    else:
        A = C
        if side == "inner":
            raise ValueError("a star body is measured on its outer side")
    if isinstance(mu, PushforwardMeasure):
        raise NotImplementedError("boundary measures of pushforwards are not supported")

    est = None
    if mode in ("auto", "exact") and isinstance(mu, DisintegratedMeasure) and isinstance(K, ConvexBody):
        t = homothety_factor(A, K, mu.grid)
        if t is not None:
            est = BoundaryEstimate(_exact_boundary(mu, K, t), "exact", details={"t": t})
        elif mode == "exact":
            raise ValueError("exact mode needs the set to be a homothet of K")
    if est is None and mode in ("auto", "perimeter") and A.n == 2:
        est = BoundaryEstimate(_perimeter_boundary(mu, A, K), "perimeter")
    if est is None:
        if mode not in ("auto", "numeric"):
            raise ValueError(f"mode {mode!r} does not apply to this input")
        est = _numeric_boundary(mu, A, K)
    return est if detail else est.value


# ------------------------------------------------------------ homogeneity


def check_homogeneity(mu, q: float, trials: int = 20, seed: int = 0, tol: float = 1e-9) -> IneqReport:
    """Largest relative defect |mu(lam A)^q - lam mu(A)^q| / (lam mu(A)^q)."""
    q = exponent(q)
    if q == 0 or not math.isfinite(q):
        raise ValueError("q must be finite and nonzero")
    rng = np.random.default_rng(seed)
    grid = mu.grid
    tail_ok = True
    if isinstance(mu, DisintegratedMeasure):
        tail_ok = mu.law.tail_integrable
    elif isinstance(mu, MixtureMeasure):
        tail_ok = all(c.law.tail_integrable for c in mu.components)
    worst = 0.0
    where = {}
    for k in range(trials):
        S = random_star(grid, rng)
        for lam in (0.5, 2.0, 3.0):
            if tail_ok:
                a, b = measure_of_costar(mu, CoStar(S)), measure_of_costar(mu, CoStar(scale(S, lam)))
            else:
                a, b = measure_of_star(mu, S), measure_of_star(mu, scale(S, lam))
            ref = lam * a ** q
            d = abs(b ** q - ref) / ref
            if d > worst:
                worst, where = d, {"trial": k, "lambda": lam}
    return IneqReport("homogeneity_defect", worst, tol, "<=", 0.0, witness={"q": q, "seed": seed, **where})


def random_star(grid: DirectionGrid, rng: np.random.Generator, noise: float = 0.2, degree: int = 4) -> Body:
    """Random star body: Fourier star in the plane, a box otherwise."""
    if grid.n == 2:
        a = rng.uniform(-1, 1, degree) * noise / np.arange(1, degree + 1)
        b = rng.uniform(-1, 1, degree) * noise / np.arange(1, degree + 1)
        return star_fourier(grid, float(rng.uniform(0.7, 1.5)), a, b)
    from .geometry import box
    lo = -rng.uniform(0.5, 1.5, grid.n)
    hi = rng.uniform(0.5, 1.5, grid.n)
    return box(grid, lo, hi)


def eta_from_slab(mu: DisintegratedMeasure, mask: Optional[np.ndarray] = None) -> float:
    """eta(A) recovered from the mass of the radial slab (1, 2]A.

    For a q-homogeneous measure the slab mass is eta(A) q (2^{1/q} - 1)
    in absolute value.
    """
    q = mu.q
    if q is None or q == 0:
        raise ValueError("slab recovery needs a homogeneous measure with q != 0")
    if mask is None:
        mask = np.ones(mu.grid.size, dtype=bool)
    sub = mu.restrict(np.asarray(mask, dtype=bool))
    ones = np.ones(mu.grid.size)
    if sub.law.tail_integrable:
        slab = sub.costar_mass(ones) - sub.costar_mass(2 * ones)
    else:
        slab = sub.star_mass(2 * ones) - sub.star_mass(ones)
    return slab / (q * (2.0 ** (1.0 / q) - 1.0))
