"""Numerical laboratory for nonlinear Beltrami equations ``f_zbar = H(z, f_z)`` on disks."""

from .grid import ComplexField, DiskDomain, GradientField, make_disk, wirtinger
from .solver import SolverConfig, SolverReport, solve_frozen, solve_riemann_hilbert
from .structure import (StructureFunction, freeze, holder_linear, linear_structure,
                        power_example, zero_structure)

__version__ = "0.1.0"

__all__ = [
    "ComplexField", "DiskDomain", "GradientField", "make_disk", "wirtinger",
    "SolverConfig", "SolverReport", "solve_frozen", "solve_riemann_hilbert",
    "StructureFunction", "freeze", "holder_linear", "linear_structure", "power_example",
    "zero_structure",
]
