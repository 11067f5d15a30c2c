"""
Homogeneous measures, set masses and boundary measures
=======================================================

The density |x|^-3 on the plane has exponent p = -1/3 and is (-1)-homogeneous.
Complements of bounded star sets have finite mass, while the sets themselves
carry infinite mass because of the singularity at the origin.
"""
import math

from cbmkit import CoStar, disc, make_grid, star_fourier
from cbmkit.measures import (boundary_measure, check_homogeneity, homogeneous_measure, measure_of_costar,
                             measure_of_star)

grid = make_grid(2, 4096)
mu = homogeneous_measure(1.0, -1 / 3, grid)
print("dual exponent q =", mu.q)

# complements of discs: the mass falls off like 2 pi / t
for t in (0.5, 1, 2, 4):
    print(f"mu(R^2 minus disc({t})) = {measure_of_costar(mu, CoStar(disc(grid, t))):.12f}   2pi/t = {2 * math.pi / t:.12f}")

print("mu(disc(1)) =", measure_of_star(mu, disc(grid, 1.0)))

# a radial function 2 + cos(theta) describes a shifted circle through the origin's far side
S = star_fourier(grid, 2.0, [1.0])
print(f"off-centre complement: {measure_of_costar(mu, CoStar(S)):.12f} vs 2pi/sqrt3 = {2 * math.pi / math.sqrt(3):.12f}")

# inner boundary measure of the complement of tK, with the unit disc as gauge
K = disc(grid, 1.0)
for t in (1, 2):
    exact = boundary_measure(mu, CoStar(disc(grid, t)), K, mode="exact")
    numeric = boundary_measure(mu, CoStar(disc(grid, t)), K, mode="numeric")
    print(f"boundary of complement of disc({t}): exact {exact:.9f}, finite differences {numeric:.9f}")

print("largest homogeneity defect:", check_homogeneity(mu, mu.q).lhs)
