"""Weighted star discrepancy of regular grids with per-coordinate mesh-sizes."""

__version__ = "0.1.0"

from .core import (
    CoefficientSet,
    Constant,
    Explicit,
    ExplicitWeights,
    Geometric,
    GridSpec,
    PointSet,
    Polynomial,
    ProductWeights,
    gamma,
    grid_points,
    parse_weights,
    project,
)
from .errors import CertificationError, GridTractError, InfeasibleRecipeError, ResourceCapError
from .griddisc import (
    SubsetValue,
    lower_bound_coord,
    star_disc_grid,
    subset_max_product,
    weighted_disc_upper_bound,
    weighted_star_disc_grid,
)
from .oracle import local_discrepancy, star_disc_exact, weighted_star_disc_exact
from .allocator import (
    AllocationReport,
    NBracket,
    allocate_greedy,
    allocate_spt,
    allocate_uwt,
    allocate_wt,
    n_lower_bounds,
    n_min_exact,
    qpt_bound_geometric,
    uwt_logn_bound,
)
from .tractability import DiagnosticSchedule, classify, uwt_diagnostic, wt_diagnostic
