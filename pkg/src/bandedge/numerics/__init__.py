"""Shared numerical kernels: cylinder functions, complex root refinement,
inverse Laplace transforms, and weakly singular Volterra integration."""

from .cylinder import CylinderKind, cylinder_bessel, bessel_j_pair, hankel1_pair
from .laplace import TimeGrid, InversionSettings, invert_laplace
from .rootfind import find_root_complex, scan_roots_rectangle, winding_number
from .volterra import solve_volterra

__all__ = [
    "CylinderKind",
    "cylinder_bessel",
    "bessel_j_pair",
    "hankel1_pair",
    "TimeGrid",
    "InversionSettings",
    "invert_laplace",
    "find_root_complex",
    "scan_roots_rectangle",
    "winding_number",
    "solve_volterra",
]
