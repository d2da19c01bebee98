"""Exact solvers and structure checks for the minimum 0-extension problem."""

from .exceptions import *  # noqa: F401,F403
from .estimator import SolveResult, ZeroExtensionSolver, pick_method, solve_instance
from .fileformat import (
    format_instance,
    format_product,
    parse_instance,
    parse_product,
    read_instance,
    read_product,
    write_instance,
)
from .gadgets import (
    Gadget,
    feasible_mappings,
    gadget_nonmodular,
    gadget_nonorientable,
    pinned_tau,
    verify_gadget,
)
from .instance import Instance, ZeroExtension, zero_extension_cost
from .lp import LinearProgram, extension_lp, solve_lp, solve_minimizable
from .metric import FiniteMetric, Graph, cartesian_product, path_metric, underlying_graph
from .modular import (
    canonical_embedding,
    classify,
    compute_orbits,
    is_modular,
    orbit_decomposition,
    orbit_graph,
    orient,
)
from .retraction import (
    ProductSubgraph,
    aux_metric,
    build_delta,
    product_retraction,
    tighten,
    two_orbit_retraction,
)
from .solvers import brute_force, exact_minimum, min_cut, solve_median, solve_orbit_uncrossing

__version__ = "0.1.0"
