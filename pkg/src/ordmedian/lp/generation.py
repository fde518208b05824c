"""Cutting-plane loop: solve, ask a separation oracle, add its rows, repeat."""
from __future__ import annotations

from typing import Callable

from .model import BasicSolution, Constraint, LinearProgram, RoundLimit
from .simplex import solve_basic

# An oracle takes the candidate values and returns a list of violated
# constraints (empty when none).  A single Constraint or None is accepted too.
SeparationOracle = Callable[[dict], "list[Constraint] | Constraint | None"]


def _as_list(found) -> list:
    if found is None:
        return []
    if isinstance(found, Constraint):
        return [found]
    return list(found)


def solve_with_generation(lp: LinearProgram, oracle: SeparationOracle,
                          max_rounds: int | None = None) -> BasicSolution:
    work = lp.copy()
    if max_rounds is None:
        max_rounds = 10 * (len(lp.vars) + len(lp.constraints))
    added = []
    for rnd in range(1, max_rounds + 1):
        sol = solve_basic(work)
        cuts = _as_list(oracle(sol.values))
        if not cuts:
            sol.rounds = rnd
            sol.cuts = added
            return sol
        for c in cuts:
            if c.satisfied(sol.values):
                raise ValueError(f"oracle returned a non-violated row {c.name!r}")
            added.append(work.add(c))
    raise RoundLimit(f"no convergence after {max_rounds} rounds")


def top_ell_oracle(per_client_terms: dict, ell: int, R_var, name="top") -> SeparationOracle:
    """Separation for  sum_{j in S} cost_j(x) <= R  over all |S| = ell.

    ``per_client_terms[j]`` is a coefficient map whose value at x is client j's
    LP cost; the most violated set takes the ell largest costs (ties by order).
    """
    keys = list(per_client_terms)

    def oracle(values):
        costs = []
        for pos, j in enumerate(keys):
            cost = sum(a * values.get(v, 0) for v, a in per_client_terms[j].items())
            costs.append((-cost, pos, j))
        costs.sort()
        top = costs[:ell]
        total = -sum(c for c, _, _ in top)
        if total <= values.get(R_var, 0):
            return []
        coeffs = {}
        for _, _, j in top:
            for v, a in per_client_terms[j].items():
                coeffs[v] = coeffs.get(v, 0) + a
        coeffs[R_var] = coeffs.get(R_var, 0) - 1
        label = ",".join(str(j) for _, _, j in top)
        return [Constraint(coeffs, "<=", 0, f"{name}[{label}]")]

    return oracle
