"""One-dimensional radial laws, interval unions and the half-line checks.

A law is a density phi on (0, inf). Its tail integral is
Phi(t) = int_t^inf phi and its isoperimetric profile is I = phi o Phi^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .report import IneqReport


@dataclass(frozen=True)
class RadialLaw:
    phi: Callable[[np.ndarray], np.ndarray]
    name: str = "law"
    Phi_fn: Optional[Callable] = None
    Phi_inv_fn: Optional[Callable] = None
    head_fn: Optional[Callable] = None
    logphi_fn: Optional[Callable] = None
    dlogphi_fn: Optional[Callable] = None
    origin_nonintegrable: bool = True
    tail_integrable: bool = True
    nonincreasing: bool = True
    log_convex: bool = True
    strictly_log_convex: bool = False
    support_end: float = math.inf
    params: dict = field(default_factory=dict)

    # -- evaluation -------------------------------------------------------
    def __call__(self, t):
        return self.density(t)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(np.isinf(t), 0.0, self.phi(np.where(np.isinf(t), 1.0, t)))
        return out if out.ndim else float(out)

    def logphi(self, t):
        t = np.asarray(t, dtype=float)
        if self.logphi_fn is not None:
            return self.logphi_fn(t)
        with np.errstate(divide="ignore"):
            return np.log(self.phi(t))

    def dlogphi(self, t):
        if self.dlogphi_fn is not None:
            return self.dlogphi_fn(np.asarray(t, dtype=float))
        t = np.asarray(t, dtype=float)
        h = 1e-6 * t
        return (self.logphi(t + h) - self.logphi(t - h)) / (2 * h)

    def Phi(self, t):
        """Tail mass int_t^inf phi; Phi(0) is the total mass, Phi(inf) = 0."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        mid = (t > 0) & (t < self.support_end) & np.isfinite(t)
        low = t <= 0
        if low.any():
            out[low] = math.inf if self.origin_nonintegrable else self._total()
        if mid.any():
            if not self.tail_integrable:
                out[mid] = math.inf
            elif self.Phi_fn is not None:
                with np.errstate(over="ignore"):
                    out[mid] = self.Phi_fn(t[mid])
            else:
                out[mid] = [_tail_quad(self.density, ti, self.support_end) for ti in t[mid]]
        return float(out[0]) if scalar else out

    def head(self, t):
        """Mass near the origin, int_0^t phi (inf when non-integrable)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        pos = t > 0
        if pos.any():
            if self.origin_nonintegrable:
                out[pos] = math.inf
            elif self.head_fn is not None:
                out[pos] = self.head_fn(t[pos])
            else:
                out[pos] = [integrate.quad(self.density, 0.0, ti, limit=200)[0] for ti in t[pos]]
        return float(out[0]) if scalar else out

    def _total(self):
        if not self.tail_integrable:
            return math.inf
        return self.head(1.0) + self.Phi(1.0)

    def Phi_inv(self, x):
        """Inverse of the tail mass; Phi_inv(0) is the support end."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            if xi < 0:
                raise ValueError("Phi_inv needs x >= 0")
            if xi == 0.0:
                out[i] = self.support_end
            elif xi == math.inf:
                out[i] = 0.0
            elif self.Phi_inv_fn is not None:
                out[i] = self.Phi_inv_fn(xi)
            else:
                out[i] = self._bisect_inv(xi)
        return float(out[0]) if scalar else out

    def _bisect_inv(self, x):
        if not self.origin_nonintegrable and x > self._total():
            raise ValueError("requested mass exceeds the total mass of the law")
        f = lambda s: math.log(self.Phi(math.exp(s))) - math.log(x)
        lo, hi = -1.0, 1.0
        while f(lo) < 0:
            lo *= 2
            if lo < -700:
                raise ValueError("Phi_inv bracket failed")
        while self.Phi(math.exp(hi)) > x:
            hi *= 2
            if hi > 700:
                raise ValueError("Phi_inv bracket failed")
        return math.exp(optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=400))

    def scaled(self, c: float) -> "RadialLaw":
        """The law c*phi (used for the normalized law of a warped measure)."""
        c = float(c)
        if c <= 0:
            raise ValueError("scale must be positive")
        base = self
        return replace(
            self,
            phi=lambda t: c * base.phi(t),
            name=f"{c:g}*{self.name}",
            Phi_fn=None if self.Phi_fn is None else (lambda t: c * base.Phi_fn(t)),
            Phi_inv_fn=(lambda x: base.Phi_inv(x / c)),
            head_fn=None if self.head_fn is None else (lambda t: c * base.head_fn(t)),
            logphi_fn=lambda t: math.log(c) + base.logphi(t),
            dlogphi_fn=base.dlogphi,
            params={**self.params, "scale": c},
        )


def _tail_quad(phi, t, end=math.inf):
    # log substitution s = log u keeps long tails well conditioned
    if end < math.inf:
        return integrate.quad(phi, t, end, limit=200)[0]
    g = lambda s: phi(math.exp(s)) * math.exp(s)
    val, _ = integrate.quad(g, math.log(t), math.log(t) + 60.0, limit=400)
    return val


# ---------------------------------------------------------------- laws


def power_law(a: float, c: float = 1.0) -> RadialLaw:
    """phi(t) = c t^{-a}."""
    a = float(a)
    c = float(c)
    if a > 1:
        Phi = lambda t: c * t ** (1.0 - a) / (a - 1.0)
        Phi_inv = lambda x: ((a - 1.0) * x / c) ** (1.0 / (1.0 - a))
        head = None
    elif a < 1:
        Phi = None
        Phi_inv = None
        head = lambda t: c * t ** (1.0 - a) / (1.0 - a)
    else:
        Phi = Phi_inv = head = None
    return RadialLaw(
        phi=lambda t: c * np.power(t, -a),
        name=f"power(a={a:g})",
        Phi_fn=Phi,
        Phi_inv_fn=Phi_inv,
        head_fn=head,
        logphi_fn=lambda t: math.log(c) - a * np.log(t),
        dlogphi_fn=lambda t: -a / t,
        origin_nonintegrable=a >= 1,
        tail_integrable=a > 1,
        nonincreasing=a >= 0,
        log_convex=a >= 0,
        strictly_log_convex=a > 0,
        params={"kind": "power", "a": a, "c": c},
    )


def power_exp_law(c: float = 1.0) -> RadialLaw:
    """phi(t) = c t^{-2} e^{1/t}, with Phi(t) = c (e^{1/t} - 1)."""
    c = float(c)
    return RadialLaw(
        phi=lambda t: c * np.exp(1.0 / t - 2.0 * np.log(t)),
        name="power_exp",
        Phi_fn=lambda t: c * np.expm1(1.0 / t),
        Phi_inv_fn=lambda x: 1.0 / math.log1p(x / c),
        logphi_fn=lambda t: math.log(c) + 1.0 / t - 2.0 * np.log(t),
        dlogphi_fn=lambda t: -2.0 / t - 1.0 / t ** 2,
        strictly_log_convex=True,
        params={"kind": "power_exp", "c": c},
    )


def table_law(t: Sequence[float], phi: Sequence[float], a_lo: float = 2.0, a_hi: float = 2.0) -> RadialLaw:
    """Right-continuous step law from samples, with power tails outside.

    phi equals phi_k on [t_k, t_{k+1}); below t_0 it continues as
    phi_0 (s/t_0)^{-a_lo} and beyond t_m as phi_m (s/t_m)^{-a_hi}.
    """
    ts = np.asarray(t, dtype=float)
    ps = np.asarray(phi, dtype=float)
    if ts.ndim != 1 or ts.shape != ps.shape or len(ts) < 2:
        raise ValueError("table law needs matching 1-D arrays of length >= 2")
    if np.any(np.diff(ts) <= 0) or ts[0] <= 0:
        raise ValueError("table abscissae must be positive and increasing")
    if np.any(np.diff(ps) > 0) or np.any(ps <= 0):
        raise ValueError("table values must be positive and non-increasing")
    if a_lo < 1 or a_hi <= 1:
        raise ValueError("tails need a_lo >= 1 and a_hi > 1")
    # mass of the step pieces beyond each knot
    pieces = ps[:-1] * np.diff(ts)
    tail_end = ps[-1] * ts[-1] / (a_hi - 1.0)
    after = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + tail_end

    def density(s):
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(ts, s, side="right") - 1, 0, len(ts) - 1)
        out = ps[k]
        out = np.where(s < ts[0], ps[0] * (s / ts[0]) ** (-a_lo), out)
        out = np.where(s >= ts[-1], ps[-1] * (s / ts[-1]) ** (-a_hi), out)
        return out

    def Phi_scalar(s):
        if s >= ts[-1]:
            return ps[-1] * ts[-1] / (a_hi - 1.0) * (s / ts[-1]) ** (1.0 - a_hi)
        if s < ts[0]:
            if a_lo == 1:
                return ps[0] * ts[0] * math.log(ts[0] / s) + after[0]
            return ps[0] * ts[0] / (a_lo - 1.0) * ((s / ts[0]) ** (1.0 - a_lo) - 1.0) + after[0]
        k = int(np.searchsorted(ts, s, side="right") - 1)
        return ps[k] * (ts[k + 1] - s) + after[k + 1]

    def dlog(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < ts[0], -a_lo / s, np.where(s >= ts[-1], -a_hi / s, 0.0))

    return RadialLaw(
        phi=density,
        name="table",
        Phi_fn=np.vectorize(Phi_scalar, otypes=[float]),
        dlogphi_fn=dlog,
        strictly_log_convex=False,
        log_convex=False,
        params={"kind": "table", "t": ts.tolist(), "phi": ps.tolist(), "a_lo": a_lo, "a_hi": a_hi},
    )


def law_from_function(phi, name="custom", **flags) -> RadialLaw:
    return RadialLaw(phi=phi, name=name, **flags)


def law_from_literal(lit: dict) -> RadialLaw:
    kind = lit.get("kind")
    if kind == "power":
        return power_law(float(lit.get("a", 2.0)), float(lit.get("c", 1.0)))
    if kind == "power_exp":
        return power_exp_law(float(lit.get("c", 1.0)))
    if kind == "table":
        return table_law(lit["t"], lit["phi"], float(lit.get("a_lo", 2.0)), float(lit.get("a_hi", 2.0)))
    raise ValueError(f"unknown law kind {kind!r}")


def Phi(law: RadialLaw, t):
    return law.Phi(t)


def Phi_inv(law: RadialLaw, x):
    return law.Phi_inv(x)


def iso_profile(law: RadialLaw, v):
    """I(v) = phi(Phi^{-1}(v)), with phi(inf) = 0."""
    s = law.Phi_inv(v)
    return law.density(s)


# --------------------------------------------------------- interval sets


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted disjoint half-open intervals [a, b) inside [0, inf)."""

    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @classmethod
    def of(cls, *pairs) -> "IntervalUnion":
        return cls(tuple((float(a), float(b)) for a, b in pairs))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self, law: RadialLaw) -> float:
        total = 0.0
        for a, b in self.intervals:
            if a == 0.0:
                if law.origin_nonintegrable:
                    return math.inf
                total += law.head(b) if b < math.inf else law._total()
            else:
                total += law.Phi(a) - law.Phi(b)
        return total

    def complement(self) -> "IntervalUnion":
        out, cur = [], 0.0
        for a, b in self.intervals:
            if a > cur:
                out.append((cur, a))
            cur = b
        if cur < math.inf:
            out.append((cur, math.inf))
        return IntervalUnion(tuple(out))

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalUnion(tuple(out))

    def minus(self, other: "IntervalUnion") -> "IntervalUnion":
        return self.intersect(other.complement())

    def dilate_right(self, d: float) -> "IntervalUnion":
        """A + [0, d]: each component grows by d to the right, then merge."""
        return IntervalUnion(tuple((a, b + d) for a, b in self.intervals))


def _normalize(pairs):
    iv = sorted((float(a), float(b)) for a, b in pairs if float(b) > float(a))
    for a, _ in iv:
        if a < 0:
            raise ValueError("intervals must lie in [0, inf)")
    out = []
    for a, b in iv:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return tuple(out)


def boundary_1d(law: RadialLaw, C: IntervalUnion, b: float) -> float:
    """Inner boundary measure of C for dilations of its complement by [0, b]."""
    if b <= 0:
        raise ValueError("b must be positive")
    left = [a for a, _ in C if a > 0]
    return b * float(np.sum(law.density(np.array(left)))) if left else 0.0


def ocbm_1d(law: RadialLaw, A: IntervalUnion, b: float, t: float, tol: float = 1e-10) -> IneqReport:
    """Compare mu(R+ \\ (A + t[0,b])) with Phi(Phi^{-1}(mu(R+ \\ A)) + t Phi^{-1}(Phi(b)))."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    m = A.complement().measure(law)
    if not math.isfinite(m):
        raise ValueError("complement of A has infinite mass")
    lhs = A.dilate_right(t * b).complement().measure(law)
    rhs = law.Phi(law.Phi_inv(m) + t * law.Phi_inv(law.Phi(b)))
    return IneqReport("ocbm_1d", lhs, rhs, "<=", tol,
                      witness={"A": list(A.intervals), "b": b, "t": t, "law": law.name},
                      path="interval")


@dataclass
class LawCheck:
    passed: bool
    min_defect: float
    strict: bool
    details: dict = field(default_factory=dict)


def check_logconvex(law: RadialLaw, grid: Optional[np.ndarray] = None) -> LawCheck:
    """Midpoint convexity of log phi on a geometric grid."""
    ts = np.geomspace(1e-6, 1e6, 1000) if grid is None else np.asarray(grid, dtype=float)
    a, b = ts[:-1], ts[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        la, lb, lm = law.logphi(a), law.logphi(b), law.logphi(0.5 * (a + b))
        defect = 0.5 * (la + lb) - lm
    # points where phi has vanished carry no information
    keep = np.isfinite(defect)
    defect, lm = defect[keep], lm[keep]
    scale = 1e-12 * (1.0 + np.abs(lm))
    ok = bool(np.all(defect >= -scale)) and defect.size > 0
    md = float(defect.min())
    return LawCheck(ok, md, ok and md > 0, {"points": len(ts)})


def check_F_concavity(law: RadialLaw, t0: float, grid: Optional[np.ndarray] = None) -> LawCheck:
    """Midpoint concavity of F(x) = Phi(Phi^{-1}(x) + t0), plus the identity
    I'(x) = -(log phi)'(Phi^{-1}(x)) checked by central differences."""
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    xs = law.Phi(np.geomspace(1e-2, 1e2, 200))[::-1] if grid is None else np.asarray(grid, dtype=float)
    xs = xs[np.isfinite(xs) & (xs > 0)]
    F = lambda x: law.Phi(law.Phi_inv(x) + t0)
    a, b = xs[:-1], xs[1:]
    defect = F(0.5 * (a + b)) - 0.5 * (F(a) + F(b))
    scale = 1e-12 * (1.0 + np.abs(F(0.5 * (a + b))))
    concave = bool(np.all(defect >= -scale))

    I = lambda x: law.density(law.Phi_inv(x))
    h = 1e-5 * xs
    fd = (I(xs + h) - I(xs - h)) / (2 * h)
    formula = -law.dlogphi(law.Phi_inv(xs))
    rel = np.abs(fd - formula) / np.maximum(np.abs(formula), 1e-300)
    deriv_ok = bool(np.nanmax(rel) <= 1e-6)
    return LawCheck(concave and deriv_ok, float(defect.min()), concave and float(defect.min()) > 0,
                    {"F_concave": concave, "derivative_identity": deriv_ok, "max_rel_derivative_error": float(np.nanmax(rel))})


@dataclass
class HalflineDiagnosis:
    is_halfline: bool
    offending_mass: float
    equality: bool
    consistent: bool
    boundary: float
    profile_bound: float


def equality_shape_1d(law: RadialLaw, C: IntervalUnion, b: float, tol: float = 1e-9) -> HalflineDiagnosis:
    m = C.measure(law)
    if not math.isfinite(m):
        raise ValueError("C must have finite mass")
    s0 = law.Phi_inv(m)
    H = IntervalUnion(((s0, math.inf),)) if m > 0 else IntervalUnion()
    off = C.minus(H).measure(law) + H.minus(C).measure(law)
    is_half = off <= tol * max(1.0, m)
    lhs = boundary_1d(law, C, b)
    rhs = b * float(iso_profile(law, m))
    eq = abs(lhs - rhs) <= tol * max(1.0, abs(rhs))
    return HalflineDiagnosis(is_half, off, eq, (not eq) or is_half, lhs, rhs)


def random_interval_union(rng: np.random.Generator, k: int, start_at_origin: bool = True) -> IntervalUnion:
    """k disjoint intervals with log-uniform gaps; the first starts at 0 if asked."""
    pts = np.cumsum(np.exp(rng.uniform(-3, 1.5, size=2 * k)))
    if start_at_origin:
        pts = np.concatenate([[0.0], pts[1:]])
    pairs = [(pts[2 * i], pts[2 * i + 1]) for i in range(k)]
    return IntervalUnion(tuple(pairs))
