"""Column randomization for large LPs: sample columns, solve the restricted LP,
and bound the optimality gap; with column generation as the baseline."""

from .lp_core import LPInstance, SimplexOptions, SolveResult, SparseColumn, solve_simplex
from .sampling import SampleSet, sample_groupwise, sample_iid
from .cr_solver import CRRun, solve_cr, solve_distributional, solve_full
from .colgen import CGRun, cold_start, pricing_for, run_cg, warm_start_from_cr

__version__ = "0.1.0"

__all__ = [
    "CGRun", "CRRun", "LPInstance", "SampleSet", "SimplexOptions", "SolveResult", "SparseColumn",
    "cold_start", "pricing_for", "run_cg", "sample_groupwise", "sample_iid", "solve_cr",
    "solve_distributional", "solve_full", "solve_simplex", "warm_start_from_cr",
]
