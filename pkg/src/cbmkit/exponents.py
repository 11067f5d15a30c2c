"""Extended-real exponents, the p <-> q duality and weighted power means.

Exponents are plain floats: ``-inf``, ``0.0`` and ``+inf`` play the role of
the tagged values. Measure values are nonnegative floats with ``inf``.
"""

from __future__ import annotations

import math

import numpy as np

NEG_INF = -math.inf
ZERO = 0.0
POS_INF = math.inf

SNAP = 1e-12


def exponent(p: float) -> float:
    """Normalize an exponent: snap tiny values to ZERO, keep infinities."""
    p = float(p)
    if math.isnan(p):
        raise ValueError("exponent must not be NaN")
    if math.isfinite(p) and abs(p) < SNAP:
        return ZERO
    return p


def ext_add(a: float, b: float) -> float:
    return a + b


def ext_mul(a: float, b: float) -> float:
    """Product with the measure-theoretic convention 0 * inf = 0."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def dual_exponent(p: float, n: int, homogeneous: bool = False) -> float:
    """Return q with 1/q = 1/p + n.

    Parameters
    ----------
    p : float
        Density exponent; ``inf``/``-inf`` mean 1/p = 0.
    n : int
        Ambient dimension.
    homogeneous : bool
        If True, p = 0 is rejected because it would give q = 0, which is
        not an admissible homogeneity degree.

    Returns
    -------
    float
        q, or ``NEG_INF`` when 1/p + n vanishes.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    p = exponent(p)
    if p == ZERO:
        if homogeneous:
            raise ValueError("p = 0 gives q = 0, which has no homogeneous-measure meaning")
        return ZERO
    inv = 0.0 if math.isinf(p) else 1.0 / p
    s = inv + n
    if abs(s) <= 1e-12 * n:
        return NEG_INF
    return 1.0 / s


def power_mean(a: float, b: float, lam: float, p: float) -> float:
    """Weighted p-mean (lam a^p + (1-lam) b^p)^(1/p) with limit conventions."""
    a = float(a)
    b = float(b)
    if a < 0 or b < 0:
        raise ValueError("power_mean needs nonnegative inputs")
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    p = exponent(p)
    if a == b:
        return a
    if p == POS_INF:
        return max(a, b)
    if p == NEG_INF:
        return min(a, b)
    if p <= 0 and min(a, b) == 0.0:
        return 0.0
    if p == ZERO:
        if math.isinf(a) or math.isinf(b):
            return math.inf
        return math.exp(lam * math.log(a) + (1.0 - lam) * math.log(b))
    # finite nonzero p, both inputs in [0, inf]
    if p > 0:
        if math.isinf(a) or math.isinf(b):
            return math.inf
        if a == 0.0:
            return (1.0 - lam) ** (1.0 / p) * b
        if b == 0.0:
            return lam ** (1.0 / p) * a
    else:
        if math.isinf(a):
            return (1.0 - lam) ** (1.0 / p) * b
        if math.isinf(b):
            return lam ** (1.0 / p) * a
    la, lb = math.log(a), math.log(b)
    geo = lam * la + (1.0 - lam) * lb
    if abs(p) * abs(la - lb) < 1.0:
        # near p = 0 the log-sum-exp form cancels; expand around the geometric mean
        s = lam * math.expm1(p * (la - geo)) + (1.0 - lam) * math.expm1(p * (lb - geo))
        return math.exp(geo + math.log1p(s) / p)
    terms = np.array([math.log(lam) + p * la, math.log1p(-lam) + p * lb])
    top = terms.max()
    lse = top + math.log(np.exp(terms - top).sum())
    return math.exp(lse / p)
