"""Fault-tolerant ordered k-median: relaxation and stochastic rounding."""
from .bundles import BundleError, BundleFamily, create_bundles
from .laminar import LaminarError, LaminarFamily, build_laminar, filter_dangerous
from .lp import FtLP, build_ft_lp, build_top_lp
from .pipeline import FtEnumerationFailed, FtReport, prepare_rounding, run_rounding, solve_ft
from .rounding import AuxError, AuxPolytope, SampledSolution, build_aux_polytope, stochastic_round
from .split import FractionalFt, SplitError, split_facilities

__all__ = [
    "BundleError", "BundleFamily", "create_bundles", "LaminarError", "LaminarFamily", "build_laminar",
    "filter_dangerous", "FtLP", "build_ft_lp", "build_top_lp", "FtEnumerationFailed", "FtReport",
    "prepare_rounding", "run_rounding", "solve_ft", "AuxError", "AuxPolytope", "SampledSolution",
    "build_aux_polytope", "stochastic_round", "FractionalFt", "SplitError", "split_facilities",
]
