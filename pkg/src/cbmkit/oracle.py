"""Brute-force planar oracle on a voxel grid.

Cell centres sit on the lattice h*Z^2, so the sum of two occupied centres is
again a centre and Minkowski sums are exact on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .geometry import Body, CoStar, ConvexBody, bounding_radius, box, radial_sum, scale

DEFAULT_H = 1.0 / 256
DEFAULT_WINDOW = 4.0


@dataclass(frozen=True, eq=False)
class VoxelSet:
    """Occupied cells ``mask[i, j]`` with centres ((i0+i)h, (j0+j)h)."""

    lo: tuple
    h: float
    mask: np.ndarray

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("cell size must be positive")
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2:
            raise ValueError("voxel masks are planar")
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "lo", (int(self.lo[0]), int(self.lo[1])))

    @property
    def shape(self):
        return self.mask.shape

    @property
    def bounds(self):
        """Outer edges (xmin, xmax, ymin, ymax) of the cell union."""
        (i0, j0), (nx, ny), h = self.lo, self.mask.shape, self.h
        return ((i0 - 0.5) * h, (i0 + nx - 0.5) * h, (j0 - 0.5) * h, (j0 + ny - 0.5) * h)

    def centers(self):
        (i0, j0), (nx, ny) = self.lo, self.mask.shape
        xs = (i0 + np.arange(nx)) * self.h
        ys = (j0 + np.arange(ny)) * self.h
        return xs, ys

    def area(self) -> float:
        return float(self.mask.sum()) * self.h * self.h

    def embed(self, lo, shape) -> "VoxelSet":
        """Same set on a larger index window."""
        out = np.zeros(shape, dtype=bool)
        di, dj = self.lo[0] - lo[0], self.lo[1] - lo[1]
        nx, ny = self.mask.shape
        if di < 0 or dj < 0 or di + nx > shape[0] or dj + ny > shape[1]:
            if self.mask.any():
                sub = self.mask
                ii, jj = np.nonzero(sub)
                ii, jj = ii + di, jj + dj
                if ii.min() < 0 or jj.min() < 0 or ii.max() >= shape[0] or jj.max() >= shape[1]:
                    raise ValueError("set escapes the target window")
                out[ii, jj] = True
                return VoxelSet(lo, self.h, out)
        out[di:di + nx, dj:dj + ny] = self.mask
        return VoxelSet(lo, self.h, out)

    def __or__(self, other: "VoxelSet") -> "VoxelSet":
        lo, shape = _union_window(self, other)
        return VoxelSet(lo, self.h, self.embed(lo, shape).mask | other.embed(lo, shape).mask)

    def to_pgm(self, path: str):
        m = self.mask.T[::-1].astype(np.uint8) * 255
        with open(path, "wb") as fh:
            fh.write(f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode())
            fh.write(m.tobytes())


def _union_window(a: VoxelSet, b: VoxelSet):
    if a.h != b.h:
        raise ValueError("cell sizes differ")
    lo = (min(a.lo[0], b.lo[0]), min(a.lo[1], b.lo[1]))
    hi = (max(a.lo[0] + a.shape[0], b.lo[0] + b.shape[0]), max(a.lo[1] + a.shape[1], b.lo[1] + b.shape[1]))
    return lo, (hi[0] - lo[0], hi[1] - lo[1])


def _index_range(a: float, b: float, h: float):
    i0 = int(math.ceil(a / h - 1e-9))
    i1 = int(math.floor(b / h + 1e-9))
    return i0, i1 - i0 + 1


def _box_tuple(box_) -> tuple:
    if box_ is None:
        box_ = DEFAULT_WINDOW
    if np.isscalar(box_):
        w = float(box_)
        return (-w, w, -w, w)
    return tuple(float(v) for v in box_)


def voxelize(body, box_=None, h: float = DEFAULT_H, chunk: int = 1 << 18) -> VoxelSet:
    """Rasterize by centre sampling; a CoStar becomes window minus inner."""
    xmin, xmax, ymin, ymax = _box_tuple(box_)
    costar = isinstance(body, CoStar)
    target = body.inner if costar else body
    if target.n != 2:
        raise ValueError("the voxel oracle is planar")
    if not costar:
        ex = _extent(target)
        if ex[0] < xmin - 1e-12 or ex[1] > xmax + 1e-12 or ex[2] < ymin - 1e-12 or ex[3] > ymax + 1e-12:
            raise ValueError("body exceeds the voxel box")
    i0, nx = _index_range(xmin, xmax, h)
    j0, ny = _index_range(ymin, ymax, h)
    xs = (i0 + np.arange(nx)) * h
    ys = (j0 + np.arange(ny)) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    inside = np.empty(len(P), dtype=bool)
    for s in range(0, len(P), chunk):
        inside[s:s + chunk] = target.contains(P[s:s + chunk])
    mask = inside.reshape(nx, ny)
    if costar:
        mask = ~mask
    return VoxelSet((i0, j0), h, mask)


def _extent(body: Body) -> tuple:
    """(xmin, xmax, ymin, ymax) of a planar body."""
    if isinstance(body, ConvexBody):
        u = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
        hx = body.support(u)
        return (-hx[0], hx[1], -hx[2], hx[3])
    pts = _sample_boundary(body)
    pad = 0.02 * float(np.abs(pts).max())
    return (pts[:, 0].min() - pad, pts[:, 0].max() + pad, pts[:, 1].min() - pad, pts[:, 1].max() + pad)


def _sample_boundary(body: Body, m: int = 2048) -> np.ndarray:
    th = 2 * math.pi * np.arange(m) / m
    d = np.column_stack([np.cos(th), np.sin(th)])
    return body.radial(d)[:, None] * d


def tight_voxelize(body: Body, h: float = DEFAULT_H, pad: float = 0.0) -> VoxelSet:
    """Voxelize in the smallest lattice-aligned box around the body."""
    x0, x1, y0, y1 = _extent(body)
    pad += 2 * h
    return voxelize(body, (x0 - pad, x1 + pad, y0 - pad, y1 + pad), h)


def _resample(A: VoxelSet, w: float) -> VoxelSet:
    """Nearest-cell image of A under x -> w x."""
    if w == 1.0:
        return A
    (i0, j0), (nx, ny) = A.lo, A.shape
    a0, na = int(math.floor(w * (i0 - 0.5))), int(math.ceil(w * (nx + 1))) + 2
    b0, nb = int(math.floor(w * (j0 - 0.5))), int(math.ceil(w * (ny + 1))) + 2
    si = np.rint((a0 + np.arange(na)) / w).astype(int) - i0
    sj = np.rint((b0 + np.arange(nb)) / w).astype(int) - j0
    vi = (si >= 0) & (si < nx)
    vj = (sj >= 0) & (sj < ny)
    out = np.zeros((na, nb), dtype=bool)
    out[np.ix_(vi, vj)] = A.mask[np.ix_(si[vi], sj[vj])]
    return VoxelSet((a0, b0), A.h, out)


def voxel_minkowski(A: VoxelSet, B: VoxelSet, wa: float = 1.0, wb: float = 1.0, box_=None) -> VoxelSet:
    """Grid Minkowski sum wa*A + wb*B (dilation by shifted union, via FFT counts)."""
    if A.h != B.h:
        raise ValueError("cell sizes differ")
    A, B = _resample(A, wa), _resample(B, wb)
    if not A.mask.any() or not B.mask.any():
        return VoxelSet((A.lo[0] + B.lo[0], A.lo[1] + B.lo[1]), A.h, np.zeros((1, 1), dtype=bool))
    counts = fftconvolve(A.mask.astype(float), B.mask.astype(float))
    S = VoxelSet((A.lo[0] + B.lo[0], A.lo[1] + B.lo[1]), A.h, counts > 0.5)
    if box_ is not None:
        xmin, xmax, ymin, ymax = _box_tuple(box_)
        i0, nx = _index_range(xmin, xmax, A.h)
        j0, ny = _index_range(ymin, ymax, A.h)
        S = S.embed((i0, j0), (nx, ny))
    return S


# --------------------------------------------------------------- measures


@dataclass
class VoxelMeasure:
    value: float
    flagged: bool = False
    details: dict = field(default_factory=dict)


def _density_fn(mu) -> Callable:
    return mu.density if hasattr(mu, "density") else mu


def _cell_mass_refined(density, cx, cy, h, depth, singular, mu):
    """Mass of a square cell near the singular point by recursive 2x2 splitting."""
    d = math.hypot(cx - singular[0], cy - singular[1])
    if d > h or depth == 0:
        if d <= 0.5 * h * math.sqrt(2) and depth == 0:
            # the singular point sits in this last subcell: use a disc of equal area
            if mu is not None and hasattr(mu, "star_mass") and singular == (0.0, 0.0):
                r = h / math.sqrt(math.pi)
                m = mu.star_mass(np.full(mu.grid.size, r))
                return m, not math.isfinite(m)
            return math.inf, True
        val = float(density(np.array([[cx, cy]]))[0])
        return val * h * h, not math.isfinite(val)
    total, flag = 0.0, False
    q = h / 4
    for sx in (-q, q):
        for sy in (-q, q):
            m, f = _cell_mass_refined(density, cx + sx, cy + sy, h / 2, depth - 1, singular, mu)
            total += m
            flag |= f
    return total, flag


@lru_cache(maxsize=8)
def _density_grid(mu_key, lo, shape, h):
    mu = _DENSITY_OWNERS[mu_key]
    xs = (lo[0] + np.arange(shape[0])) * h
    ys = (lo[1] + np.arange(shape[1])) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        W = _density_fn(mu)(np.column_stack([X.ravel(), Y.ravel()])).reshape(shape)
    return W


_DENSITY_OWNERS: dict = {}


def voxel_measure(mu, A: VoxelSet, singular=(0.0, 0.0), depth: int = 6) -> VoxelMeasure:
    """Riemann sum of the density over occupied cells, refining near the singular point."""
    key = id(mu)
    _DENSITY_OWNERS[key] = mu
    W = _density_grid(key, A.lo, A.shape, A.h)
    h = A.h
    xs, ys = A.centers()
    near_i = np.nonzero(np.abs(xs - singular[0]) <= h * 1.5)[0]
    near_j = np.nonzero(np.abs(ys - singular[1]) <= h * 1.5)[0]
    special = np.zeros(A.shape, dtype=bool)
    if len(near_i) and len(near_j):
        special[np.ix_(near_i, near_j)] = True
    regular = A.mask & ~special
    total = float(np.sum(W[regular])) * h * h
    flagged = not math.isfinite(total)
    density = _density_fn(mu)
    for i, j in zip(*np.nonzero(A.mask & special)):
        m, f = _cell_mass_refined(density, xs[i], ys[j], h, depth, tuple(singular), mu)
        total += m
        flagged |= f
    return VoxelMeasure(total, flagged, {"h": h, "cells": int(A.mask.sum())})


def window_tail_mass(mu, A: VoxelSet) -> float:
    """Exact mass outside the cell union of A's index window."""
    from .measures import measure_of_costar

    xmin, xmax, ymin, ymax = A.bounds
    grid = mu.grid
    return measure_of_costar(mu, CoStar(box(grid, [xmin, ymin], [xmax, ymax])))


def complement_mass(mu, S: VoxelSet, window=None) -> float:
    """mu(R^2 minus S): Riemann sum on the window plus the exact outer tail."""
    xmin, xmax, ymin, ymax = _box_tuple(window)
    h = S.h
    i0, nx = _index_range(xmin, xmax, h)
    j0, ny = _index_range(ymin, ymax, h)
    W = S.embed((i0, j0), (nx, ny))
    comp = VoxelSet(W.lo, h, ~W.mask)
    inner = voxel_measure(mu, comp)
    return inner.value + window_tail_mass(mu, comp)


# --------------------------------------------------------------- boundaries


@dataclass
class VoxelBoundary:
    value: float
    residual: float
    flagged: bool
    eps: list
    quotients: list


def voxel_boundary(mu, A, K, eps: Optional[Sequence[float]] = None, side: str = "outer",
                   h: float = DEFAULT_H, window=None) -> VoxelBoundary:
    """Finite-difference boundary estimate mu((A + eps K) minus A)/eps, extrapolated to 0.

    ``A`` is a VoxelSet or body; with ``side='inner'`` it is read as a
    co-star and its window complement is dilated instead.
    """
    if eps is None:
        eps = [2.0 ** -k for k in (2, 3, 4, 5, 6)]
    clip = True
    if not isinstance(A, VoxelSet):
        if isinstance(A, CoStar) or window is not None:
            A = voxelize(A, window, h)
        else:
            A = tight_voxelize(A, h, pad=max(eps) * bounding_radius(K))
            clip = False
    h = A.h
    if side == "inner":
        A = VoxelSet(A.lo, h, ~A.mask)
    quot = []
    for e in eps:
        Ke = tight_voxelize(scale(K, e), h) if not isinstance(K, VoxelSet) else _resample(K, e)
        D = voxel_minkowski(A, Ke)
        lo, shape = _union_window(D, A)
        ring = D.embed(lo, shape).mask & ~A.embed(lo, shape).mask
        R = VoxelSet(lo, h, ring)
        if clip:
            # growth past the window edge is an artifact of truncation
            keep = np.zeros(shape, dtype=bool)
            di, dj = A.lo[0] - lo[0], A.lo[1] - lo[1]
            keep[di:di + A.shape[0], dj:dj + A.shape[1]] = True
            R = VoxelSet(lo, h, ring & keep)
        quot.append(voxel_measure(mu, R).value / e)
    eps_a = np.asarray(eps, dtype=float)
    quot_a = np.asarray(quot)
    # rasterizing small dilations loses a band of width ~h, hence the 1/eps term
    cols = [np.ones_like(eps_a), eps_a]
    if len(eps_a) >= 4:
        cols.append(h / eps_a)
    if len(eps_a) >= 5:
        cols.append(eps_a ** 2)
    M = np.column_stack(cols)
    coef = np.linalg.lstsq(M, quot_a, rcond=None)[0]
    fit = M @ coef
    value = float(coef[0])
    resid = float(np.abs(fit - quot_a).max() / max(abs(value), 1e-300))
    d = np.diff(quot_a)
    monotone = bool(np.all(d >= -1e-3 * abs(value)) or np.all(d <= 1e-3 * abs(value)))
    return VoxelBoundary(value, resid, (not monotone) or resid > 0.05, list(eps_a), list(quot_a))


def analytic_star_boundary_estimate(mu, A: Body, K: Body):
    """Numeric boundary mode for non-convex planar bodies, via the voxel grid."""
    from .measures import BoundaryEstimate

    vb = voxel_boundary(mu, A, K)
    return BoundaryEstimate(vb.value, "numeric_voxel", vb.residual, vb.flagged,
                            {"eps": vb.eps, "quotients": vb.quotients})


# --------------------------------------------------------------- gap diagnostics


@dataclass
class GapReport:
    gap: float
    sum_area: float
    radial_area: float
    area_A: float
    area_B: float
    minkowski_chain: bool
    holder_lhs: float
    holder_rhs: float
    holder_chain: bool
    tolerance: float


def radial_vs_minkowski_gap(A: Body, B: Body, cone: Optional[Callable] = None, h: float = DEFAULT_H) -> GapReport:
    """Lebesgue area of (A+B) in the cone minus the area of the radial sum.

    Also reports the two comparison chains for planar cones:
    sqrt|A+B| >= sqrt|A| + sqrt|B| >= sqrt|A +_r B|, and
    int rho_A rho_B <= 2 |A|^{1/2} |B|^{1/2}.
    """
    if A.n != 2:
        raise ValueError("gap diagnostics are planar")
    grid = A.grid
    wcone = np.ones(grid.size) if cone is None else np.asarray(cone(grid.directions), dtype=float)
    rA, rB = A.rho_on(grid), B.rho_on(grid)
    sig = grid.weights * wcone
    area_A = 0.5 * float(np.dot(sig, rA ** 2))
    area_B = 0.5 * float(np.dot(sig, rB ** 2))
    radial_area = 0.5 * float(np.dot(sig, (rA + rB) ** 2))
    VA, VB = tight_voxelize(A, h), tight_voxelize(B, h)
    S = voxel_minkowski(VA, VB)
    if cone is None:
        sum_area = S.area()
    else:
        xs, ys = S.centers()
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        P = np.column_stack([X.ravel(), Y.ravel()])
        r = np.linalg.norm(P, axis=1)
        w = np.zeros(len(P))
        nz = r > 0
        w[nz] = cone(P[nz] / r[nz, None])
        w[~nz] = 1.0
        sum_area = float(np.dot(S.mask.ravel(), w)) * h * h
    per = 2 * math.pi * (float(rA.max()) + float(rB.max()))
    tol = 4 * h * per
    holder_lhs = float(np.dot(sig, rA * rB))
    holder_rhs = 2.0 * math.sqrt(area_A) * math.sqrt(area_B)
    mink = math.sqrt(sum_area) >= math.sqrt(area_A) + math.sqrt(area_B) - tol / max(1.0, math.sqrt(sum_area)) \
        and math.sqrt(area_A) + math.sqrt(area_B) >= math.sqrt(radial_area) - 1e-12
    return GapReport(sum_area - radial_area, sum_area, radial_area, area_A, area_B, bool(mink),
                     holder_lhs, holder_rhs, holder_lhs <= holder_rhs * (1 + 1e-12), tol)


# --------------------------------------------------------------- sums for checkers


def star_sum_complement_mass(mu, A: Body, B: Body, wa: float, wb: float, h: float = 1.0 / 128,
                             with_radial: bool = True, dump: Optional[str] = None) -> dict:
    """Upper estimate of mu(R^2 minus (wa A + wb B)) for star bodies.

    The grid sum of the rasterized bodies and the radial combination are both
    subsets of the true sum; their union is measured.
    """
    sA, sB = scale(A, wa), scale(B, wb)
    VA, VB = tight_voxelize(sA, h), tight_voxelize(sB, h)
    S = voxel_minkowski(VA, VB)
    if with_radial:
        R = radial_sum(sA, sB)
        S = S | tight_voxelize(R, h)
    if dump:
        S.to_pgm(dump)
    xmin, xmax, ymin, ymax = S.bounds
    L = max(-xmin, xmax, -ymin, ymax) + 4 * h
    value = complement_mass(mu, S, L)
    return {"value": value, "h": h, "window": L, "cells": int(S.mask.sum())}
