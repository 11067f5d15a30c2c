"""
Functional forms: gradients, weak norms and Sobolev-type bounds
================================================================

Gauge-radial piecewise-linear functions have exact gradient moduli, and their
superlevel sets are complements of homothets, so every quantity below is in
closed form or a one-dimensional integral.
"""
import math

from cbmkit import disc, make_grid
from cbmkit.measures import homogeneous_measure
from cbmkit.onedim import power_law
from cbmkit.sobolev import RadialFunction, StepFunction, check_sobolev, functional_cbm_1d, total_gradient_mass, weak_norms

grid = make_grid(2, 4096)
mu = homogeneous_measure(1.0, -1 / 3, grid)
ramp = RadialFunction(disc(grid, 1.0), (0.0, 1.0, 2.0), (0.0, 0.0, 1.0))

print("total gradient mass:", total_gradient_mass(ramp, mu))
norms = weak_norms(ramp, mu, alpha=0.5, beta=0.25)
for k, v in norms.items():
    print(f"  {k:10s} {v:.6f}")
print("  2 pi^2 =", 2 * math.pi ** 2, " 2 pi ln 2 =", 2 * math.pi * math.log(2))

for variant in ("weak_L1", "nash", "coarea", "functional_equiv", "L_beta"):
    r = check_sobolev(ramp, mu, variant)
    print(f"{variant:16s} lhs {r.lhs:10.6f} rhs {r.rhs:10.6f} pass {r.passed} ({r.mode})")

f = StepFunction((0.0, 1.0, 2.0), (0.0, 0.5, 1.0))
g = StepFunction((0.0, 3.0), (0.0, 1.0))
r = functional_cbm_1d(f, g, 0.5, power_law(2.0), -1.0)
print(f"step functions on the half-line: {r.lhs:.12f} <= {r.rhs:.12f}")
