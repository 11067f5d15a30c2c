"""
Searching for isoperimetric minimizers
=======================================

Among complements of star sets with a fixed mass, the inner boundary measure
is smallest for complements of homothets of the gauge body. A Fourier search
over log-radial functions drifts back to circles.
"""
import math

import numpy as np

from cbmkit import CoStar, box, disc, make_grid, scale, star_fourier
from cbmkit.measures import homogeneous_measure
from cbmkit.verifiers import bonnesen_concavity, check_isoperimetry, equality_diagnostics, profile_search

grid = make_grid(2, 4096)
mu = homogeneous_measure(1.0, -1 / 3, grid)
K = disc(grid, 1.0)

for v in (math.pi, 2 * math.pi):
    r = profile_search(mu, K, v, degree=3, seed=0, start_noise=0.2)
    print(f"mass {v:.4f}: best {r.best:.10f}, bound {r.bound:.10f}, gap {r.gap:.1e}, "
          f"radius spread {np.ptp(r.rho):.1e}, mean radius {r.mean_radius:.6f}")

wobbly = star_fourier(grid, 1.0, [0.0, 0.08], [0.05])
r = check_isoperimetry(mu, K, CoStar(wobbly), mu.q)
d = equality_diagnostics(wobbly, K)
print(f"perturbed disc: slack {r.slack:.4f}, homothety residual {d.homothety_residual:.4f}")

d = equality_diagnostics(box(grid, [0, 0], [1, 1]), box(grid, [1, 0], [2, 1]), translation_search=True)
print(f"translated unit squares: ratio {d.ratio:.6f}, shift {np.round(d.shift, 9)}")

leb = homogeneous_measure(1.0, math.inf, grid)
print("homothets, affinity defect:", bonnesen_concavity(leb, K, scale(K, 2.0), 0.5).affinity_defect)
b = bonnesen_concavity(leb, box(grid, [0, 0], [1, 1]), K, 0.5)
print(f"square to disc: concavity defect {b.concavity_defect:.2e}, affinity defect {b.affinity_defect:.2e}")
