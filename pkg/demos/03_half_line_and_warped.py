"""
One-dimensional laws and warped measures
=========================================

A radial law phi on (0, inf) has tail integral Phi and profile I = phi o Phi^-1.
Dilating a set on the half-line can only lose as much mass as dilating a
tail [s, inf) of the same mass. Warped measures lift such a law along the rays
of a star body.
"""
import math

from cbmkit import CoStar, disc, make_grid, scale, star_fourier
from cbmkit.measures import warped_measure
from cbmkit.onedim import (IntervalUnion, Phi, check_logconvex, iso_profile, ocbm_1d, power_exp_law,
                           power_law)
from cbmkit.verifiers import check_iso_warped, check_ocbm_nd

inv_sq = power_law(2.0)
print("Phi(2) =", Phi(inv_sq, 2.0), " I(1/2) =", iso_profile(inv_sq, 0.5))

for A in (IntervalUnion.of((0, 2)), IntervalUnion.of((0, 1), (2, 3))):
    r = ocbm_1d(inv_sq, A, 1.0, 3.0 if len(A) == 1 else 1.0)
    print(f"{A}: outside dilation {r.lhs:.15f} <= {r.rhs:.15f}")

law = power_exp_law()
print("exp law log-convex:", check_logconvex(law).passed)

grid = make_grid(2, 4096)
B = disc(grid, 1.0)
mu = warped_measure(1.0, B, law)
for t in (1.0, 2.0):
    r = check_iso_warped(mu, B, CoStar(scale(B, t)))
    phi_t = t ** -2 * math.exp(1 / t)
    print(f"complement of {t}B: boundary {r.lhs:.12f}, profile bound {r.rhs:.12f}, 2 pi phi(t) = {2 * math.pi * phi_t:.12f}")

r = check_iso_warped(mu, B, CoStar(star_fourier(grid, 1.0, [0, 0, 0.1])))
print(f"perturbed complement: boundary exceeds the bound by {r.slack:.4f}")

r = check_ocbm_nd(mu, disc(grid, 2.0), B, 1.0)
print(f"outer dilation of 2B by B: {r.lhs:.12f} vs {r.rhs:.12f}")
