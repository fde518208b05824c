"""Reduction pipelines for the robust, matroid and knapsack variants."""
from .params import ReductionParams, knapsack_preset, matroid_preset, preset, robust_preset
from .pipeline import (EnumerationFailed, RunReport, solve_enumerate, solve_knapsack, solve_matroid,
                       solve_oracle_assisted, solve_reduction, solve_robust)
