"""Direction grids, star-shaped and convex bodies, gauges and set sums.

Convex bodies are stored exactly as ``core + r * ball`` where the core is a
convex polygon (n=2) or an axis box (n=1, 3). That class is closed under
scaling and Minkowski combination, so sums of discs, boxes and polygons
stay exact, and both the support and the radial function can be evaluated
in any direction without a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


class GridMismatch(ValueError):
    pass


# ---------------------------------------------------------------- grids


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    n: int
    directions: np.ndarray
    weights: np.ndarray
    angles: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.weights)

    def __eq__(self, other):
        return isinstance(other, DirectionGrid) and self.n == other.n and self.size == other.size

    def __hash__(self):
        return hash((self.n, self.size))

    def triangulation(self):
        if self.n != 3:
            raise ValueError("triangulation exists only for n=3 grids")
        return _sphere_triangulation(self.size)


@lru_cache(maxsize=32)
def make_grid(n: int, resolution: int = 4096) -> DirectionGrid:
    """Quadrature grid on the unit sphere S^{n-1}.

    n=1 gives the two atoms -1, +1; n=2 uses N equispaced angles with equal
    weights 2*pi/N; n=3 uses a Fibonacci lattice with equal weights 4*pi/N.
    """
    if n == 1:
        d = np.array([[-1.0], [1.0]])
        return DirectionGrid(1, d, np.ones(2))
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if n == 2:
        th = 2.0 * math.pi * np.arange(resolution) / resolution
        d = np.column_stack([np.cos(th), np.sin(th)])
        return DirectionGrid(2, d, np.full(resolution, 2.0 * math.pi / resolution), th)
    if n == 3:
        return DirectionGrid(3, _fibonacci(resolution), np.full(resolution, 4.0 * math.pi / resolution))
    raise ValueError(f"unsupported dimension {n}")


def _fibonacci(N: int) -> np.ndarray:
    i = np.arange(N) + 0.5
    z = 1.0 - 2.0 * i / N
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    d = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return d / np.linalg.norm(d, axis=1, keepdims=True)


@lru_cache(maxsize=8)
def _sphere_triangulation(N: int):
    from scipy.spatial import ConvexHull, cKDTree

    pts = _fibonacci(N)
    simplices = ConvexHull(pts).simplices
    incident = [[] for _ in range(N)]
    for k, tri in enumerate(simplices):
        for v in tri:
            incident[v].append(k)
    return pts, simplices, incident, cKDTree(pts)


def _interp_sphere(N: int, values: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Spherical barycentric interpolation on the Fibonacci triangulation."""
    pts, simplices, incident, tree = _sphere_triangulation(N)
    _, near = tree.query(dirs, k=6)
    out = np.empty(len(dirs))
    for j, x in enumerate(dirs):
        done = False
        for v in near[j]:
            for k in incident[v]:
                tri = simplices[k]
                M = pts[tri].T
                lam = np.linalg.solve(M, x)
                if lam.min() >= -1e-12:
                    w = lam / lam.sum()
                    out[j] = w @ values[tri]
                    done = True
                    break
            if done:
                break
        if not done:
            out[j] = values[near[j][0]]
    return out


def unit_directions(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# ---------------------------------------------------------------- bodies


class Body:
    """Common interface: ``radial(dirs)`` evaluates rho at unit directions."""

    n: int
    grid: DirectionGrid

    def radial(self, dirs: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def rho(self) -> np.ndarray:
        cached = self.__dict__.get("_rho_cache")
        if cached is None:
            cached = self.radial(self.grid.directions)
            object.__setattr__(self, "_rho_cache", cached)
        return cached

    def rho_on(self, grid: DirectionGrid) -> np.ndarray:
        if grid == self.grid:
            return self.rho
        return self.radial(grid.directions)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts, axis=1)
        out = r == 0.0
        nz = ~out
        if nz.any():
            out[nz] = r[nz] < self.radial(pts[nz] / r[nz, None])
        return out

    @property
    def is_convex(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class StarBody(Body):
    """Star-shaped set {r theta : r < rho(theta)} about the origin.

    ``fn`` (optional) evaluates rho exactly at arbitrary unit directions;
    without it, values between grid directions are interpolated linearly in
    angle (n=2) or barycentrically (n=3). ``dfn`` optionally gives
    d rho / d theta for n=2.
    """

    grid: DirectionGrid
    samples: np.ndarray
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dfn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    allow_inf: bool = False
    label: str = "star"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.size,):
            raise GridMismatch("radial samples do not match the grid size")
        if not np.all(s > 0):
            raise ValueError("radial function must be positive in every direction")
        if not self.allow_inf and not np.all(np.isfinite(s)):
            raise ValueError("infinite radii are only allowed for co-star complements")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "_rho_cache", s)

    @property
    def n(self) -> int:
        return self.grid.n

    def radial(self, dirs):
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        if self.fn is not None:
            return np.asarray(self.fn(dirs), dtype=float)
        g = self.grid
        if g.n == 1:
            return np.where(dirs[:, 0] > 0, self.samples[1], self.samples[0])
        if g.n == 2:
            th = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), 2 * math.pi)
            ang = np.append(g.angles, 2 * math.pi)
            return np.interp(th, ang, np.append(self.samples, self.samples[0]))
        return _interp_sphere(g.size, self.samples, dirs)

    def derivative_on_grid(self) -> np.ndarray:
        """d rho / d theta at the n=2 grid angles (exact if ``dfn``, else spectral)."""
        if self.grid.n != 2:
            raise ValueError("angular derivative only defined for n=2")
        if self.dfn is not None:
            return np.asarray(self.dfn(self.grid.directions), dtype=float)
        N = self.grid.size
        k = np.fft.rfftfreq(N, 1.0 / N)
        spec = np.fft.rfft(self.samples) * 1j * k
        if N % 2 == 0:
            spec[-1] = 0.0
        return np.fft.irfft(spec, N)

    def with_grid(self, grid: DirectionGrid) -> "StarBody":
        if self.fn is None:
            raise GridMismatch("sampled star body cannot be moved to another grid exactly")
        return StarBody(grid, self.fn(grid.directions), self.fn, self.dfn, self.allow_inf, self.label)


def _angle(dirs):
    return np.arctan2(dirs[:, 1], dirs[:, 0])


def star_fourier(grid: DirectionGrid, a0: float, cos=(), sin=(), log: bool = False) -> StarBody:
    """n=2 star body with rho = a0 + sum a_k cos(k t) + b_k sin(k t).

    With ``log=True`` the series is the logarithm of rho instead.
    """
    if grid.n != 2:
        raise ValueError("Fourier stars are planar")
    a = np.asarray(cos, dtype=float)
    b = np.asarray(sin, dtype=float)
    ks_a = np.arange(1, len(a) + 1)
    ks_b = np.arange(1, len(b) + 1)

    def series(t):
        return a0 + np.cos(np.outer(t, ks_a)) @ a + np.sin(np.outer(t, ks_b)) @ b

    def dseries(t):
        return -np.sin(np.outer(t, ks_a)) @ (a * ks_a) + np.cos(np.outer(t, ks_b)) @ (b * ks_b)

    if log:
        fn = lambda d: np.exp(series(_angle(d)))
        dfn = lambda d: np.exp(series(_angle(d))) * dseries(_angle(d))
    else:
        fn = lambda d: series(_angle(d))
        dfn = lambda d: dseries(_angle(d))
    return StarBody(grid, fn(grid.directions), fn, dfn, label="star_fourier")


def star_from_function(grid: DirectionGrid, fn, dfn=None, allow_inf=False, label="star") -> StarBody:
    return StarBody(grid, fn(grid.directions), fn, dfn, allow_inf, label)


@dataclass(frozen=True, eq=False)
class CoStar:
    """The closed set R^n minus ``inner``, i.e. {r theta : r >= rho(theta)}."""

    inner: Body

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def grid(self) -> DirectionGrid:
        return self.inner.grid


# ------------------------------------------------------- convex bodies


def _polygon_hull(pts: np.ndarray) -> np.ndarray:
    """Counterclockwise convex hull (monotone chain), collinear points dropped."""
    pts = np.unique(np.round(np.asarray(pts, dtype=float), 15), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-14:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-14:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _start_bottom(v: np.ndarray) -> np.ndarray:
    i = np.lexsort((v[:, 0], v[:, 1]))[0]
    return np.roll(v, -i, axis=0)


def _drop_collinear(v: np.ndarray) -> np.ndarray:
    if len(v) <= 2:
        return v
    scale = max(1.0, float(np.abs(v).max()))
    changed = True
    while changed and len(v) > 2:
        changed = False
        e_in = v - np.roll(v, 1, axis=0)
        e_out = np.roll(v, -1, axis=0) - v
        cr = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
        short = np.linalg.norm(e_out, axis=1) <= 1e-14 * scale
        bad = (np.abs(cr) <= 1e-13 * scale * scale) & (np.einsum("ij,ij->i", e_in, e_out) > 0) | short
        if bad.any():
            v = v[~bad] if (~bad).sum() >= 1 else v[:1]
            changed = True
    return v


def polygon_minkowski(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Sum of two convex polygons by merging their edge sequences by angle."""
    P = _start_bottom(np.asarray(P, dtype=float))
    Q = _start_bottom(np.asarray(Q, dtype=float))
    if len(P) == 1:
        return Q + P[0]
    if len(Q) == 1:
        return P + Q[0]
    eP = np.roll(P, -1, axis=0) - P
    eQ = np.roll(Q, -1, axis=0) - Q
    edges = np.vstack([eP, eQ])
    ang = np.mod(np.arctan2(edges[:, 1], edges[:, 0]), 2 * math.pi)
    order = np.argsort(ang, kind="stable")
    steps = edges[order]
    verts = P[0] + Q[0] + np.vstack([np.zeros((1, 2)), np.cumsum(steps[:-1], axis=0)])
    return _drop_collinear(verts)


@dataclass(frozen=True, eq=False)
class ConvexBody(Body):
    """Convex body ``core + r * B`` with an exact descriptor.

    ``core`` is an (k, 2) array of counterclockwise polygon vertices when
    n=2 (k=1 is a point, k=2 a segment) and a (2, n) array ``[lo, hi]`` of
    an axis box when n is 1 or 3.
    """

    grid: DirectionGrid
    core: np.ndarray
    r: float = 0.0
    kind: str = "convex"

    def __post_init__(self):
        core = np.asarray(self.core, dtype=float)
        if self.grid.n == 2:
            core = np.atleast_2d(core)
            if core.shape[1] != 2:
                raise ValueError("polygon core needs 2-D vertices")
            if len(core) >= 3:
                core = _drop_collinear(_polygon_hull(core))
        else:
            if core.shape != (2, self.grid.n):
                raise ValueError("box core must be [lo, hi]")
            if np.any(core[0] > core[1]):
                raise ValueError("box needs lo <= hi")
        if self.r < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "r", float(self.r))

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def is_convex(self) -> bool:
        return True

    # -- support and gauge data ------------------------------------------
    def support(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        ru = self.r * np.linalg.norm(u, axis=1)
        if self.n == 2:
            return (u @ self.core.T).max(axis=1) + ru
        lo, hi = self.core
        return np.maximum(u * lo, u * hi).sum(axis=1) + ru

    @property
    def h(self) -> np.ndarray:
        return self.support(self.grid.directions)

    def distance_to_core(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.n != 2:
            lo, hi = self.core
            return np.linalg.norm(pts - np.clip(pts, lo, hi), axis=1)
        V = self.core
        if len(V) == 1:
            return np.linalg.norm(pts - V[0], axis=1)
        A = V
        B = np.roll(V, -1, axis=0)
        E = B - A
        L2 = np.einsum("ij,ij->i", E, E)
        rel = pts[:, None, :] - A[None, :, :]
        t = np.clip(np.einsum("mki,ki->mk", rel, E) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
        proj = A[None] + t[..., None] * E[None]
        d = np.linalg.norm(pts[:, None, :] - proj, axis=2).min(axis=1)
        if len(V) >= 3:
            cr = E[None, :, 0] * rel[..., 1] - E[None, :, 1] * rel[..., 0]
            inside = np.all(cr >= 0, axis=1)
            d = np.where(inside, 0.0, d)
        return d

    def contains(self, pts, closed: bool = True) -> np.ndarray:
        d = self.distance_to_core(pts)
        if self.r == 0.0 and not closed:
            # interior of the polygon or box
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            if self.n != 2:
                lo, hi = self.core
                return np.all((pts > lo) & (pts < hi), axis=1)
            V = self.core
            E = np.roll(V, -1, axis=0) - V
            rel = pts[:, None, :] - V[None]
            cr = E[None, :, 0] * rel[..., 1] - E[None, :, 1] * rel[..., 0]
            return np.all(cr > 0, axis=1)
        tol = 1e-12 * max(1.0, self.r)
        return d <= self.r + tol if closed else d < self.r

    @property
    def origin_interior(self) -> bool:
        z = np.zeros((1, self.n))
        if self.r > 0 and self.distance_to_core(z)[0] < self.r:
            return True
        return bool(self.contains(z, closed=False)[0]) if self.r == 0 else False

    def radial(self, dirs):
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        if not self.origin_interior:
            raise ValueError("radial function needs the origin in the interior")
        if self.n == 1:
            lo, hi = self.core[0, 0] - self.r, self.core[1, 0] + self.r
            return np.where(dirs[:, 0] > 0, hi, -lo)
        if self.n == 2:
            return self._radial_planar(dirs)
        return self._radial_rounded_box(dirs)

    def _radial_planar(self, dirs):
        V = self.core
        r = self.r
        m = len(dirs)
        best = np.zeros(m)
        # arcs around vertices (and the vertices themselves when r = 0)
        if r > 0:
            b = dirs @ V.T
            disc = b * b - np.einsum("ij,ij->i", V, V)[None, :] + r * r
            s = np.where(disc >= 0, b + np.sqrt(np.clip(disc, 0, None)), 0.0)
            best = np.maximum(best, s.max(axis=1))
        if len(V) >= 2:
            A = V
            E = np.roll(V, -1, axis=0) - V
            L = np.linalg.norm(E, axis=1)
            keep = L > 0
            A, E, L = A[keep], E[keep], L[keep]
            nrm = np.column_stack([E[:, 1], -E[:, 0]]) / L[:, None]
            c = np.einsum("ij,ij->i", nrm, A) + r
            dn = dirs @ nrm.T
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.where(dn > 1e-300, c[None, :] / dn, 0.0)
            # foot point parameter along the edge
            P = s[..., None] * dirs[:, None, :] - r * nrm[None] - A[None]
            t = np.einsum("mki,ki->mk", P, E) / (L * L)[None]
            ok = (t >= -1e-12) & (t <= 1 + 1e-12) & (dn > 0)
            best = np.maximum(best, np.where(ok, s, 0.0).max(axis=1))
        return best

    def _radial_rounded_box(self, dirs):
        """Exit distance from box + rB: the largest ray hit over its convex pieces
        (slabs grown along one axis, edge cylinders, corner balls)."""
        lo, hi = self.core
        r = self.r
        n = self.n
        best = np.zeros(len(dirs))

        def box_far(blo, bhi):
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = blo[None, :] / dirs
                t2 = bhi[None, :] / dirs
            tmin = np.where(dirs == 0, np.where((blo <= 0) & (bhi >= 0), -np.inf, np.inf)[None, :], np.minimum(t1, t2))
            tmax = np.where(dirs == 0, np.where((blo <= 0) & (bhi >= 0), np.inf, -np.inf)[None, :], np.maximum(t1, t2))
            near, far = tmin.max(axis=1), tmax.min(axis=1)
            return np.where((near <= far) & (far > 0), far, 0.0)

        if r == 0:
            return box_far(lo, hi)
        for k in range(n):
            e = np.zeros(n)
            e[k] = r
            best = np.maximum(best, box_far(lo - e, hi + e))
        corners = np.array(np.meshgrid(*[[lo[k], hi[k]] for k in range(n)], indexing="ij")).reshape(n, -1).T
        b = dirs @ corners.T
        disc = b * b - np.einsum("ij,ij->i", corners, corners)[None, :] + r * r
        best = np.maximum(best, np.where(disc >= 0, b + np.sqrt(np.clip(disc, 0, None)), 0.0).max(axis=1))
        for k in range(n):
            i, j = [a for a in range(n) if a != k]
            a = dirs[:, i] ** 2 + dirs[:, j] ** 2
            for ci in (lo[i], hi[i]):
                for cj in (lo[j], hi[j]):
                    bb = dirs[:, i] * ci + dirs[:, j] * cj
                    dd = bb * bb - a * (ci * ci + cj * cj - r * r)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        s_ = (bb + np.sqrt(np.clip(dd, 0, None))) / a
                    axial = s_ * dirs[:, k]
                    ok = (a > 0) & (dd >= 0) & (axial >= lo[k] - 1e-12) & (axial <= hi[k] + 1e-12)
                    best = np.maximum(best, np.where(ok, s_, 0.0))
        return best

    def _radial_bisect(self, dirs):
        lo_b = np.zeros(len(dirs))
        R = np.abs(self.core).max() * math.sqrt(self.n) + self.r + 1.0
        hi_b = np.full(len(dirs), R)
        for _ in range(80):
            mid = 0.5 * (lo_b + hi_b)
            inside = self.distance_to_core(mid[:, None] * dirs) <= self.r
            if self.r == 0:
                lo_c, hi_c = self.core
                p = mid[:, None] * dirs
                inside = np.all((p >= lo_c) & (p <= hi_c), axis=1)
            lo_b = np.where(inside, mid, lo_b)
            hi_b = np.where(inside, hi_b, mid)
        return 0.5 * (lo_b + hi_b)

    # -- exact volume ------------------------------------------------------
    def volume(self) -> float:
        """Lebesgue measure from the Steiner formula of ``core + r B``."""
        r = self.r
        if self.n == 1:
            return float(self.core[1, 0] - self.core[0, 0] + 2 * r)
        if self.n == 2:
            V = self.core
            if len(V) == 1:
                area, per = 0.0, 0.0
            elif len(V) == 2:
                area, per = 0.0, 2.0 * float(np.linalg.norm(V[1] - V[0]))
            else:
                x, y = V[:, 0], V[:, 1]
                area = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
                per = float(np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1).sum())
            return area + per * r + math.pi * r * r
        a, b, c = self.core[1] - self.core[0]
        return float(a * b * c + 2 * (a * b + b * c + a * c) * r + math.pi * (a + b + c) * r * r + 4.0 / 3.0 * math.pi * r ** 3)

    def translate(self, v) -> "ConvexBody":
        v = np.asarray(v, dtype=float)
        if self.n == 2:
            return ConvexBody(self.grid, self.core + v, self.r, self.kind)
        return ConvexBody(self.grid, self.core + v[None, :], self.r, self.kind)

    def center(self) -> np.ndarray:
        """A point in the interior (vertex average / box centre)."""
        if self.n == 2:
            return self.core.mean(axis=0)
        return self.core.mean(axis=0)

    def boundary_pieces(self, order: int = 24):
        """Gauss nodes on the boundary (n=2): points, unit normals, length weights."""
        if self.n != 2:
            raise ValueError("boundary pieces are planar only")
        xg, wg = np.polynomial.legendre.leggauss(order)
        tg, wg = 0.5 * (xg + 1), 0.5 * wg
        V = self.core
        pts, nrms, wts = [], [], []
        if len(V) >= 2:
            E = np.roll(V, -1, axis=0) - V
            L = np.linalg.norm(E, axis=1)
            for A, e, l in zip(V, E, L):
                if l == 0:
                    continue
                nu = np.array([e[1], -e[0]]) / l
                pts.append(A + np.outer(tg, e) + self.r * nu)
                nrms.append(np.tile(nu, (order, 1)))
                wts.append(wg * l)
        if self.r > 0:
            if len(V) == 1:
                arcs = [(V[0], 0.0, 2 * math.pi)]
            else:
                E = np.roll(V, -1, axis=0) - V
                out_ang = np.arctan2(-E[:, 0], E[:, 1])  # normal angle of each edge
                arcs = []
                for i in range(len(V)):
                    a0 = out_ang[i - 1]
                    a1 = out_ang[i]
                    span = np.mod(a1 - a0, 2 * math.pi)
                    arcs.append((V[i], a0, span))
            for c, a0, span in arcs:
                if span <= 0:
                    continue
                ang = a0 + span * tg
                nu = np.column_stack([np.cos(ang), np.sin(ang)])
                pts.append(c + self.r * nu)
                nrms.append(nu)
                wts.append(wg * span * self.r)
        return np.vstack(pts), np.vstack(nrms), np.concatenate(wts)


# ---------------------------------------------------------- constructors


def disc(grid: DirectionGrid, r: float = 1.0, center=None) -> ConvexBody:
    """Euclidean ball of radius r (n=1: interval, n=3: ball)."""
    c = np.zeros(grid.n) if center is None else np.asarray(center, dtype=float)
    if grid.n == 2:
        return ConvexBody(grid, c[None, :], r, "ball")
    return ConvexBody(grid, np.vstack([c, c]), r, "ball")


def box(grid: DirectionGrid, lo, hi) -> ConvexBody:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if grid.n == 2:
        V = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        return ConvexBody(grid, V, 0.0, "box")
    return ConvexBody(grid, np.vstack([lo, hi]), 0.0, "box")


def polygon(grid: DirectionGrid, vertices) -> ConvexBody:
    if grid.n != 2:
        raise ValueError("polygons are planar")
    V = np.asarray(vertices, dtype=float)
    if len(V) >= 3:
        x, y = V[:, 0], V[:, 1]
        signed = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
        if signed <= 0:
            raise ValueError("polygon vertices must be strictly counterclockwise")
    return ConvexBody(grid, V, 0.0, "polygon")


def body_from_literal(lit: dict, grid: DirectionGrid) -> Body:
    if lit.get("scale") is not None:
        inner = {k: v for k, v in lit.items() if k != "scale"}
        return scale(body_from_literal(inner, grid), float(lit["scale"]))
    kind = lit.get("kind")
    if kind == "disc":
        return disc(grid, float(lit.get("r", 1.0)), lit.get("center"))
    if kind == "box":
        return box(grid, lit["lo"], lit["hi"])
    if kind == "polygon":
        return polygon(grid, lit["vertices"])
    if kind == "rounded_box":
        B = box(grid, lit["lo"], lit["hi"])
        return ConvexBody(grid, B.core, float(lit["r"]), "convex")
    if kind == "costar":
        return CoStar(body_from_literal(lit["inner"], grid))
    if kind == "star_fourier":
        return star_fourier(grid, float(lit.get("a0", 1.0)), lit.get("cos", []), lit.get("sin", []),
                            bool(lit.get("log", False)))
    raise ValueError(f"unknown body kind {kind!r}")



# ------------------------------------------------------------ operations


def gauge(body: Body, x) -> float:
    """Minkowski functional |x| / rho(x/|x|); 0 at the origin."""
    x = np.asarray(x, dtype=float).reshape(-1)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return 0.0
    return nx / float(body.radial((x / nx)[None, :])[0])


def scale(body, t: float):
    if t <= 0:
        raise ValueError("scale factor must be positive")
    if isinstance(body, CoStar):
        return CoStar(scale(body.inner, t))
    if isinstance(body, ConvexBody):
        return ConvexBody(body.grid, body.core * t, body.r * t, body.kind)
    if isinstance(body, StarBody):
        fn = None if body.fn is None else (lambda d, f=body.fn: t * f(d))
        dfn = None if body.dfn is None else (lambda d, f=body.dfn: t * f(d))
        return StarBody(body.grid, body.samples * t, fn, dfn, body.allow_inf, body.label)
    raise TypeError(f"cannot scale {type(body).__name__}")


def _check_grids(A: Body, B: Body):
    if A.grid != B.grid:
        raise GridMismatch("bodies live on different direction grids")


def minkowski_sum(A: ConvexBody, B: ConvexBody, wa: float = 1.0, wb: float = 1.0) -> ConvexBody:
    """Exact ``wa*A + wb*B`` for convex bodies; support functions add."""
    if not (isinstance(A, ConvexBody) and isinstance(B, ConvexBody)):
        raise TypeError("minkowski_sum needs convex bodies; use the voxel oracle otherwise")
    _check_grids(A, B)
    if wa < 0 or wb < 0:
        raise ValueError("weights must be nonnegative")
    r = wa * A.r + wb * B.r
    if A.n == 2:
        core = polygon_minkowski(wa * A.core, wb * B.core)
    else:
        core = wa * A.core + wb * B.core
    if A.kind == B.kind and A.kind in ("ball", "box"):
        kind = A.kind
    else:
        kind = "convex"
    return ConvexBody(A.grid, core, r, kind)


def radial_sum(A: Body, B: Body, lam: Optional[float] = None) -> StarBody:
    """rho = lam rho_A + (1-lam) rho_B, or rho_A + rho_B when lam is None."""
    _check_grids(A, B)
    wa, wb = (1.0, 1.0) if lam is None else (lam, 1.0 - lam)

    def fn(d):
        return wa * A.radial(d) + wb * B.radial(d)

    dfn = None
    if isinstance(A, StarBody) and isinstance(B, StarBody) and A.dfn is not None and B.dfn is not None:
        dfn = lambda d: wa * A.dfn(d) + wb * B.dfn(d)
    return StarBody(A.grid, wa * A.rho + wb * B.rho, fn, dfn, label="radial_sum")


def linear_image(body: Body, M) -> Body:
    """The set M(body) for an invertible linear map M."""
    M = np.asarray(M, dtype=float)
    if abs(np.linalg.det(M)) < 1e-14:
        raise ValueError("linear map must be invertible")
    if isinstance(body, ConvexBody) and body.r == 0.0:
        if body.n == 2:
            V = body.core @ M.T
            if np.linalg.det(M) < 0:
                V = V[::-1]
            return ConvexBody(body.grid, V, 0.0, "polygon")
        if np.allclose(M, np.diag(np.diag(M))) and np.all(np.diag(M) > 0):
            return ConvexBody(body.grid, body.core * np.diag(M)[None, :], 0.0, "box")
    if isinstance(body, CoStar):
        return CoStar(linear_image(body.inner, M))
    Minv = np.linalg.inv(M)

    def fn(d):
        y = d @ Minv.T
        ny = np.linalg.norm(y, axis=1)
        return body.radial(y / ny[:, None]) / ny

    return StarBody(body.grid, fn(body.grid.directions), fn, label="linear_image")


def bounding_radius(body: Body) -> float:
    if isinstance(body, ConvexBody):
        return float(np.linalg.norm(body.core, axis=1).max() if body.n == 2 else
                     np.linalg.norm(np.maximum(np.abs(body.core[0]), np.abs(body.core[1])))) + body.r
    return float(np.max(body.rho)) * 1.02
