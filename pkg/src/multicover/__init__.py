"""LP-rounding solvers for set multi-cover, with a halfplane cutting pipeline."""

from .cluster import solve_multicover_geometric, solve_multicover_union
from .cutting import UnionComplexityProfile, build_cutting, shallow_cell_count, verify_cutting
from .errors import (
    CuttingError,
    InfeasibleError,
    InputError,
    InternalCheckError,
    MultiCoverError,
    RetryBudgetExceeded,
    SolverError,
)
from .generators import GeneratorSpec, generate
from .geometry import BoundingBox, Halfplane, Trapezoid, trapezoidal_decomposition
from .instance import (
    CoverSolution,
    MultiCoverInstance,
    PointRecord,
    RangeRecord,
    depth,
    is_feasible_cover,
    load_instance,
    residual,
    save_instance,
    total_demand,
)
from .lp import FractionalSolution, LpOptions, solve_lp, solve_lp_exact
from .oracle import lp_vertex_oracle, solve_exact, solve_greedy_baseline
from .rounding import cx_sample, extract_heavy, greedy_complete
from .vc_transform import solve_multicover_vc, solve_with_repetition

__version__ = "0.1.0"
