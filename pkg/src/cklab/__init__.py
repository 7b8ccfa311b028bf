"""Centrally flat Kähler metrics of cohomogeneity one: the reduced ODE systems,
their equilibria and flows, power series at singular orbits, closed forms and
completeness diagnostics."""
from .core import Derivative, Group, GroupSpec, State, rhs, rhs_vec, scale_symmetry
from .equilibria import Equilibrium, Family, linearize, list_equilibria, make_equilibrium, unstable_seed
from .flow import Chart, Direction, EndKind, IntegratorOptions, Trajectory, change_chart, integrate, launch, resample
from .series import series_solve, smoothness, vz_kahler_check, vz_metric_check, vz_weights
from .closed_form import HeisenbergSolution, SU2BiaxialSolution, heis_verify
from .diagnostics import SeedSpec, classify, distance_integral

__all__ = [
    "Chart", "Derivative", "Direction", "EndKind", "Equilibrium", "Family", "Group", "GroupSpec",
    "HeisenbergSolution", "IntegratorOptions", "SU2BiaxialSolution", "SeedSpec", "State", "Trajectory",
    "change_chart", "classify", "distance_integral", "heis_verify", "integrate", "launch", "linearize",
    "list_equilibria", "make_equilibrium", "resample", "rhs", "rhs_vec", "scale_symmetry", "series_solve",
    "smoothness", "unstable_seed", "vz_kahler_check", "vz_metric_check", "vz_weights",
]
__version__ = "0.1.0"
