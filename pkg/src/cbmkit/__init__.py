"""Numerical checks of complemented Brunn-Minkowski and isoperimetric inequalities
for homogeneous and warped measures."""

__version__ = "0.1.0"

from .exponents import NEG_INF, POS_INF, dual_exponent, power_mean
from .geometry import (CoStar, ConvexBody, StarBody, box, disc, gauge, make_grid, minkowski_sum, polygon, radial_sum,
                       scale, star_fourier)
from .measures import (boundary_measure, complement_mass, homogeneous_measure, measure_of_costar, measure_of_star,
                       warped_measure)
from .report import IneqReport

__all__ = [
    "__version__", "NEG_INF", "POS_INF", "dual_exponent", "power_mean", "CoStar", "ConvexBody", "StarBody",
    "box", "disc", "gauge", "make_grid", "minkowski_sum", "polygon", "radial_sum", "scale", "star_fourier", "boundary_measure",
    "complement_mass", "homogeneous_measure", "measure_of_costar", "measure_of_star", "warped_measure", "IneqReport",
]
