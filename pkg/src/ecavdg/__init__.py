"""Entropy-correction artificial viscosity DG solver."""

__version__ = "0.1.0"

from .dgcore import Discretization, SolutionField
from .mesh import assign_ldg_switches, uniform_interval_mesh, uniform_triangle_mesh
from .physics import burgers2d, euler, exact_solution, make_flux
from .refelem import build_reference_element
from .semidisc import RhsEvaluator

__all__ = [
    "Discretization",
    "SolutionField",
    "RhsEvaluator",
    "assign_ldg_switches",
    "build_reference_element",
    "burgers2d",
    "euler",
    "exact_solution",
    "make_flux",
    "uniform_interval_mesh",
    "uniform_triangle_mesh",
    "__version__",
]
