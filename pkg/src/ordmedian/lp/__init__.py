from .model import (EQ, GE, LE, BasicSolution, Constraint, Infeasible, LinearProgram, LPError,
                    RoundLimit, Unbounded)
from .simplex import solve_basic
from .generation import solve_with_generation, top_ell_oracle
from .decompose import VertexDecomposition, decompose_to_vertices, sample_vertex
