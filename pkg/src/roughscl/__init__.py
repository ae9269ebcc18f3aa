"""Scalar conservation laws driven by rough paths.

Path utilities and ORM compression, the class distance between driving paths,
and a Godunov solver for ``u_t + f(u)_x dz/dt = 0`` with piecewise-linear ``z``.
"""

__version__ = "0.1.0"

from .paths import (  # noqa: E402
    PiecewiseLinearPath,
    RegularityBounds,
    compose,
    evaluate,
    generalized_inverse,
    running_max,
    running_min,
    sample_brownian,
    total_variation,
    uniform_distance,
)
from .orm import OrmResult, OrmUndefinedError, orm  # noqa: E402
from .distance import DistanceReport, brute_force_distance, build_cost_grid, dp_distance, phi  # noqa: E402
from .solver import (  # noqa: E402
    FluxModel,
    GridSolution,
    burgers,
    estimate_bounds,
    godunov_step,
    oleinik_report,
    quartic,
    solve_path,
)
from .kernels import HAVE_COMPILED  # noqa: E402
