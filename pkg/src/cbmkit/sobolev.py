"""Gauge-radial test functions, weak quasi-norms and functional inequality checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .exponents import exponent, power_mean
from .geometry import CoStar, ConvexBody, scale
from .measures import boundary_measure, measure_of_costar, measure_of_star, rebase
from .onedim import IntervalUnion, RadialLaw
from .report import IneqReport

VARIANTS = ("weak_L1", "L_beta", "nash", "coarea", "functional_equiv")


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """f(x) = g(|x|_K) with g piecewise linear on the knots, constant after the last."""

    K: ConvexBody
    knots: tuple
    values: tuple

    def __post_init__(self):
        r = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ValueError("knots and values must be matching 1-D sequences of length >= 2")
        if r[0] != 0.0 or v[0] != 0.0:
            raise ValueError("the profile must start at g(0) = 0")
        if np.any(np.diff(r) <= 0):
            raise ValueError("knots must be strictly increasing")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(r)):
            raise ValueError("profile must be finite")
        object.__setattr__(self, "knots", tuple(r.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @classmethod
    def from_literal(cls, lit: dict, K: ConvexBody) -> "RadialFunction":
        if lit.get("kind", "radial_pl") != "radial_pl":
            raise ValueError("only radial_pl test functions are supported")
        return cls(K, tuple(lit["knots"]), tuple(lit["values"]))

    @property
    def r(self) -> np.ndarray:
        return np.asarray(self.knots)

    @property
    def g(self) -> np.ndarray:
        return np.asarray(self.values)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.g) / np.diff(self.r)

    def profile(self, s):
        return np.interp(s, self.r, self.g)

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        nrm = np.linalg.norm(pts, axis=1)
        out = np.zeros(len(pts))
        nz = nrm > 0
        d = pts[nz] / nrm[nz, None]
        out[nz] = self.profile(nrm[nz] / self.K.radial(d))
        return out

    def scaled(self, c: float) -> "RadialFunction":
        return RadialFunction(self.K, self.knots, tuple(c * v for v in self.values))

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.g)))

    def superlevel_radii(self, t: float) -> IntervalUnion:
        """Radii s with |g(s)| >= t, as a union of intervals (closedness is immaterial)."""
        if t <= 0:
            return IntervalUnion(((0.0, math.inf),))
        r, g = self.r, np.abs(self.g)
        pieces = []
        for i in range(len(r) - 1):
            a, b, ga, gb = r[i], r[i + 1], g[i], g[i + 1]
            # |g| is piecewise linear only if g keeps its sign on the piece
            if self.g[i] * self.g[i + 1] < 0:
                z = a + (b - a) * abs(self.g[i]) / (abs(self.g[i]) + abs(self.g[i + 1]))
                segs = [(a, z, ga, 0.0), (z, b, 0.0, gb)]
            else:
                segs = [(a, b, ga, gb)]
            for s0, s1, h0, h1 in segs:
                lo_ok, hi_ok = h0 >= t, h1 >= t
                if lo_ok and hi_ok:
                    pieces.append((s0, s1))
                elif lo_ok or hi_ok:
                    cut = s0 + (s1 - s0) * (t - h0) / (h1 - h0)
                    pieces.append((s0, cut) if lo_ok else (cut, s1))
        if g[-1] >= t:
            pieces.append((r[-1], math.inf))
        return IntervalUnion(tuple(pieces))

    def level_values(self) -> np.ndarray:
        """Levels at which the superlevel structure can change."""
        v = np.unique(np.abs(self.g))
        return v[v > 0]


def _is_symmetric(K: ConvexBody) -> bool:
    u = K.grid.directions
    return bool(np.allclose(K.support(u), K.support(-u), rtol=1e-12, atol=1e-12))


def grad_modulus(f: RadialFunction, r: float, gauge: Optional[ConvexBody] = None) -> float:
    """Local Lipschitz constant of f at gauge radius r, measured in the gauge of f.K."""
    if gauge is not None and gauge is not f.K:
        ga, gb = gauge.h, f.K.h
        if ga.shape != gb.shape or not np.allclose(ga, gb, rtol=1e-12, atol=1e-12):
            raise ValueError("f must be radial in the gauge used for the norm")
    if not _is_symmetric(f.K):
        raise ValueError("exact gradient moduli need a centrally symmetric gauge body")
    knots, sl = f.r, np.abs(f.slopes)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r > knots[-1]:
        return 0.0
    idx = np.searchsorted(knots, r)
    if idx < len(knots) and knots[idx] == r:
        left = sl[idx - 1] if idx >= 1 else 0.0
        right = sl[idx] if idx < len(sl) else 0.0
        return float(max(left, right))
    return float(sl[idx - 1])


class _Levels:
    """Cached masses of gauge balls and their complements."""

    def __init__(self, f: RadialFunction, mu):
        self.f, self.mu = f, mu
        self._outer = lru_cache(maxsize=4096)(self._outer_raw)
        self._inner = lru_cache(maxsize=4096)(self._inner_raw)

    def _outer_raw(self, s: float) -> float:
        if s == 0.0:
            # radial laws are never integrable at the origin
            return math.inf
        if s == math.inf:
            return 0.0
        return measure_of_costar(self.mu, CoStar(scale(self.f.K, s)))

    def _inner_raw(self, s: float) -> float:
        if s == 0.0:
            return 0.0
        if s == math.inf:
            return math.inf
        return measure_of_star(self.mu, scale(self.f.K, s))

    def annulus(self, a: float, b: float) -> float:
        """mu(a <= |x|_K < b)."""
        oa, ob = self._outer(float(a)), self._outer(float(b))
        if math.isfinite(oa):
            return oa - ob
        ia, ib = self._inner(float(a)), self._inner(float(b))
        if math.isfinite(ib):
            return ib - ia
        return math.inf

    def mass(self, t: float) -> float:
        """mu(|f| >= t)."""
        return float(sum(self.annulus(a, b) for a, b in self.f.superlevel_radii(t)))

    def boundary(self, t: float) -> float:
        """Boundary measure of {|f| >= t}: the two gauge spheres of every annulus."""
        total = 0.0
        for a, b in self.f.superlevel_radii(t):
            for s in (a, b):
                if 0.0 < s < math.inf:
                    total += boundary_measure(self.mu, CoStar(scale(self.f.K, s)), self.f.K, mode="exact")
        return total


def level_masses(f: RadialFunction, mu, ts: Sequence[float]) -> np.ndarray:
    L = _Levels(f, mu)
    return np.array([L.mass(float(t)) for t in ts])


def total_gradient_mass(f: RadialFunction, mu) -> float:
    """Sum over knot intervals of |slope| times the mass of the gauge annulus."""
    L = _Levels(f, mu)
    total = 0.0
    for (a, b), s in zip(zip(f.r[:-1], f.r[1:]), f.slopes):
        if s == 0:
            continue
        m = L.annulus(a, b)
        if not math.isfinite(m):
            return math.inf
        total += abs(s) * m
    return total


def _breaks(f: RadialFunction) -> np.ndarray:
    return np.concatenate([[0.0], f.level_values()])


def _integrate_levels(fun: Callable[[float], float], f: RadialFunction) -> float:
    """int_0^{sup f} fun(t) dt, split where the level structure changes."""
    br = _breaks(f)
    total = 0.0
    for a, b in zip(br[:-1], br[1:]):
        val, _ = quad(fun, a, b, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += val
    return total


def power_profile(alpha: float) -> Callable[[float], float]:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return lambda x: x ** (1.0 / alpha) if math.isfinite(x) else math.inf


def measure_profile(mu, K: ConvexBody) -> Callable[[float], float]:
    """I = phi_hat o Phi_hat^{-1} in the gauge frame of K."""
    nu = rebase(mu, K) if getattr(mu, "kind", None) == "homogeneous" else mu
    law: RadialLaw = nu.normalized_law

    def I(x):
        if x <= 0:
            return 0.0
        return float(law.density(np.array([float(law.Phi_inv(x))]))[0])

    return I


def weak_norms(f: RadialFunction, mu, I: Optional[Callable] = None, alpha: Optional[float] = None,
               beta: Optional[float] = None) -> dict:
    """L^{Phi,1}, L^{Phi,inf}, L^beta, L^1 and L^inf of |f| from its level masses."""
    L = _Levels(f, mu)
    if I is None:
        if alpha is None:
            q = getattr(mu, "q", None)
            if q is None:
                raise ValueError("need a profile I or an exponent alpha")
            alpha = 1.0 / (1.0 - q)
        I = power_profile(alpha)
    for t in np.concatenate([f.level_values(), [f.sup * 0.5]]):
        if t > 0 and not math.isfinite(L.mass(float(t))):
            raise ValueError("level sets must have finite mass")
    out = {"L_inf": f.sup}
    if f.sup == 0:
        return {"L_Phi_1": 0.0, "L_Phi_inf": 0.0, "L_beta": 0.0 if beta else None, "L_1": 0.0, "L_inf": 0.0}
    out["L_Phi_1"] = _integrate_levels(lambda t: I(L.mass(t)), f)
    out["L_1"] = _integrate_levels(lambda t: L.mass(t), f)
    br = _breaks(f)
    best = 0.0
    for a, b in zip(br[:-1], br[1:]):
        ts = np.linspace(a, b, 65)[1:]
        vals = [t * I(L.mass(t)) for t in ts]
        k = int(np.argmax(vals))
        best = max(best, vals[k])
        lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, len(ts) - 1)]
        if hi > lo:
            res = minimize_scalar(lambda t: -t * I(L.mass(t)), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12 * max(hi, 1.0)})
            best = max(best, -float(res.fun))
    out["L_Phi_inf"] = best
    if beta is not None:
        if beta <= 0:
            raise ValueError("beta must be positive")
        # int |f|^beta dmu = int_0^{sup^beta} mu(|f| >= u^{1/beta}) du
        ub = np.concatenate([[0.0], f.level_values() ** beta])
        tot = 0.0
        for a, b in zip(ub[:-1], ub[1:]):
            v, _ = quad(lambda u: L.mass(u ** (1.0 / beta)), a, b, limit=200, epsabs=1e-13, epsrel=1e-12)
            tot += v
        out["L_beta"] = tot ** (1.0 / beta)
    else:
        out["L_beta"] = None
    return out


def sobolev_constants(mu, K: ConvexBody) -> dict:
    q = getattr(mu, "q", None)
    if q is None or not q < 0:
        raise ValueError("needs a q-homogeneous measure with q < 0")
    m1 = measure_of_costar(mu, CoStar(K))
    C1 = -(1.0 / q) * m1 ** q
    alpha = 1.0 / (1.0 - q)
    return {"q": q, "C1": C1, "alpha": alpha, "C2": C1 ** (-alpha)}


def check_sobolev(f: RadialFunction, mu, variant: str, beta: float = 0.25, tol: float = 1e-6) -> IneqReport:
    """Functional forms of the negative-exponent isoperimetric inequality.

    ``L_beta`` is always produced in diagnostic mode.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    K = f.K
    grad = total_gradient_mass(f, mu)
    if variant == "functional_equiv":
        nrm = weak_norms(f, mu, I=measure_profile(mu, K))
        return IneqReport("sobolev_functional_equiv", grad, nrm["L_Phi_1"], ">=", tol, check="check_sobolev",
                          witness={"variant": variant})
    c = sobolev_constants(mu, K)
    C1, alpha = c["C1"], c["alpha"]
    if variant == "weak_L1":
        nrm = weak_norms(f, mu, alpha=alpha)
        return IneqReport("sobolev_weak_L1", grad, C1 * nrm["L_Phi_1"], ">=", tol, check="check_sobolev",
                          witness={"variant": variant, "L_alpha_1": nrm["L_Phi_1"], **c})
    if variant == "L_beta":
        if not 0 < beta < alpha:
            raise ValueError("beta must lie in (0, alpha)")
        nrm = weak_norms(f, mu, alpha=alpha, beta=beta)
        const = C1 * ((alpha - beta) / alpha) ** (1.0 / beta)
        rep = IneqReport("sobolev_L_beta", grad, const * nrm["L_beta"], ">=", tol, mode="diagnostic",
                         check="check_sobolev",
                         witness={"variant": variant, "beta": beta, "L_beta_norm": nrm["L_beta"], "constant": const, **c})
        rep.notes.append("diagnostic: the constant presumes level masses at most 1")
        return rep
    if variant == "nash":
        nrm = weak_norms(f, mu, alpha=alpha)
        rhs = c["C2"] * grad ** alpha * nrm["L_inf"] ** (1.0 - alpha)
        return IneqReport("sobolev_nash", nrm["L_1"], rhs, "<=", tol, check="check_sobolev",
                          witness={"variant": variant, "L_1": nrm["L_1"], "L_inf": nrm["L_inf"], "grad": grad, **c})
    # coarea chain: grad mass >= int boundary of level sets >= L^{Phi,1} with the measure's profile
    L = _Levels(f, mu)
    middle = _integrate_levels(L.boundary, f)
    bottom = weak_norms(f, mu, I=measure_profile(mu, K))["L_Phi_1"]
    rep = IneqReport("sobolev_coarea", grad, bottom, ">=", tol, check="check_sobolev",
                     witness={"variant": variant, "grad": grad, "coarea": middle, "L_Phi_1": bottom})
    sc = max(abs(grad), abs(middle), 1e-12)
    first = grad - middle >= -tol * sc
    second = middle - bottom >= -tol * max(abs(middle), abs(bottom), 1e-12)
    rep.passed = bool(rep.passed and first and second)
    rep.witness["links"] = [bool(first), bool(second)]
    return rep


# ---------------------------------------------------------------- functional CBM


@dataclass(frozen=True)
class StepFunction:
    """Nonnegative step function on [0, inf): values[i] on [edges[i], edges[i+1]), last value beyond."""

    edges: tuple
    values: tuple

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if len(e) != len(v) or e[0] != 0.0 or np.any(np.diff(e) <= 0) or np.any(v < 0):
            raise ValueError("need increasing edges from 0 and nonnegative values of equal length")

    def below(self, t: float) -> IntervalUnion:
        e = list(self.edges) + [math.inf]
        return IntervalUnion(tuple((e[i], e[i + 1]) for i, v in enumerate(self.values) if v < t))

    def integral(self, law: RadialLaw) -> float:
        e = list(self.edges) + [math.inf]
        tot = 0.0
        for i, v in enumerate(self.values):
            if v > 0:
                tot += v * IntervalUnion.of((e[i], e[i + 1])).measure(law)
        return tot


def _combine(U: IntervalUnion, V: IntervalUnion, lam: float) -> IntervalUnion:
    return IntervalUnion(tuple((lam * a + (1 - lam) * c, lam * b + (1 - lam) * d) for a, b in U for c, d in V))


def functional_cbm_1d(f: StepFunction, g: StepFunction, lam: float, law: RadialLaw, q: float,
                      tol: float = 1e-10) -> IneqReport:
    """Exact interval version on the half-line with density ``law``.

    The extremal h satisfies {h < t} >= lam{f < t} + (1-lam){g < t}, so
    int h dmu <= int_0^inf mu(R+ minus that combination) dt.
    """
    levels = np.unique(np.concatenate([[0.0], f.values, g.values]))
    lhs = 0.0
    for a, b in zip(levels[:-1], levels[1:]):
        # on (a, b] the sublevel sets are those of t = b
        S = _combine(f.below(b), g.below(b), lam)
        if S.is_empty:
            m = IntervalUnion(((0.0, math.inf),)).measure(law)
        else:
            m = S.complement().measure(law)
        lhs += (b - a) * m
    If, Ig = f.integral(law), g.integral(law)
    rhs = power_mean(If, Ig, lam, exponent(q))
    return IneqReport("functional_cbm", lhs, rhs, "<=", tol, path="interval", check="functional_cbm",
                      witness={"lambda": lam, "q": q, "int_f": If, "int_g": Ig})


def functional_cbm(f: Callable, g: Callable, lam: float, mu, q: float, outside: float, window: float = 4.0,
                   h: float = 1.0 / 128, max_levels: int = 64, tol: float = 1e-3) -> IneqReport:
    """Planar voxel version for functions equal to ``outside`` beyond the square window.

    For t above the outside value both sublevel sets contain a neighbourhood
    of infinity, so their combination is the whole plane.
    """
    from .oracle import VoxelSet, _index_range, complement_mass, voxel_minkowski

    if mu.n != 2:
        raise ValueError("the voxel version is planar")
    i0, nx = _index_range(-window, window, h)
    base = VoxelSet((i0, i0), h, np.ones((nx, nx), dtype=bool))
    xs, ys = base.centers()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    F = np.asarray(f(P), dtype=float).reshape(base.shape)
    G = np.asarray(g(P), dtype=float).reshape(base.shape)
    if np.any(F < 0) or np.any(G < 0) or outside < 0:
        raise ValueError("functions must be nonnegative")
    levels = np.unique(np.concatenate([[0.0, outside], F.ravel(), G.ravel()]))
    levels = levels[levels <= outside]
    if len(levels) > max_levels:
        raise ValueError("too many distinct levels; quantize f and g first")

    def integral(A):
        tot = 0.0
        for a, b in zip(levels[:-1], levels[1:]):
            tot += (b - a) * complement_mass(mu, VoxelSet(base.lo, h, A < b), window)
        return tot

    lhs = 0.0
    for a, b in zip(levels[:-1], levels[1:]):
        S = voxel_minkowski(VoxelSet(base.lo, h, F < b), VoxelSet(base.lo, h, G < b), lam, 1 - lam)
        ii, jj = np.nonzero(S.mask)
        reach = 0.0 if len(ii) == 0 else h * (max(np.abs(ii + S.lo[0]).max(), np.abs(jj + S.lo[1]).max()) + 0.5)
        if reach > window + 2 * h:
            raise ValueError("the combined sublevel set escapes the window")
        lhs += (b - a) * complement_mass(mu, S, window)
    If, Ig = integral(F), integral(G)
    rhs = power_mean(If, Ig, lam, exponent(q))
    return IneqReport("functional_cbm", lhs, rhs, "<=", tol, path="voxel", check="functional_cbm",
                      witness={"lambda": lam, "q": q, "int_f": If, "int_g": Ig, "h": h, "window": window})
