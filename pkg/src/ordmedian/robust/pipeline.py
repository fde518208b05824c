"""End-to-end drivers for the robust, matroid and knapsack variants."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import (Instance, InstanceError, Knapsack, MatroidVariant, Robust, Solution,
                    evaluate_solution, validate_metric)
from ..lp import Infeasible
from ..oracle import ExactOptimum, correct_guesses, enumerate_guesses, reduced_optimum, solve_exact
from .extlp import build_ext_lp, star_scale
from .params import ReductionParams, preset
from .radius import check_density_property, compute_radius_bounds, knapsack_radius_bounds
from .rounding import (RoundingError, RoundingTrace, aux_objective, duplicate_and_balance,
                       fix_fractional, init_state, iterative_round, opened_locations,
                       complete_solution)
from .sparse import (SparseInstance, U_grid, build_sparse_instance, check_sparse_conditions,
                     enumerate_sparse_instances, guess_U)


class EnumerationFailed(RuntimeError):
    pass


class Rejected(RuntimeError):
    """A candidate configuration admits no solution (infeasible relaxation or nothing opened)."""


@dataclass
class RunReport:
    variant: str
    mode: str
    solution: Solution | None = None
    cost: Fraction | None = None
    opt: Fraction | None = None
    lp_opt: Fraction | None = None
    iters: int = 0
    frac_count: int = 0
    aux_objectives: list = field(default_factory=list)
    guess: dict = field(default_factory=dict)
    sparse: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    fix_note: str = ""
    candidates: int = 0
    rejected: int = 0
    truncated: bool = False
    wall_ms: int = 0

    @property
    def ratio(self):
        if self.opt is None or self.cost is None or self.opt == 0:
            return None
        return self.cost / self.opt

    def trace(self) -> dict:
        return {
            "variant": self.variant, "mode": self.mode,
            "open": list(self.solution.open) if self.solution else None,
            "served": list(self.solution.served) if self.solution else None,
            "cost": self.cost, "opt": self.opt, "lp_opt": self.lp_opt,
            "iters": self.iters, "frac_count": self.frac_count,
            "aux_objectives": self.aux_objectives, "guess": self.guess, "sparse": self.sparse,
            "checks": self.checks, "fix": self.fix_note, "candidates": self.candidates,
            "rejected": self.rejected, "truncated": self.truncated,
        }


VARIANT_OF = {Robust: "robust", Knapsack: "knapsack", MatroidVariant: "matroid"}


def variant_name(inst: Instance) -> str:
    for cls, name in VARIANT_OF.items():
        if isinstance(inst.variant, cls):
            return name
    raise InstanceError("the reduction pipelines handle robust, matroid and knapsack instances")


def check_entry(inst: Instance, params: ReductionParams) -> None:
    name = variant_name(inst)
    if name != params.variant:
        raise InstanceError(f"{params.variant} parameters on a {name} instance")
    validate_metric(inst.metric, separation=True)


def run_candidate(inst: Instance, params: ReductionParams, f, sparse: SparseInstance | None,
                  checks: dict | None = None, V_star=None) -> RunReport:
    """ExtLP, duplication, iterative rounding, fix and completion for one configuration.

    With ``checks`` (oracle-assisted runs) the lemma-level inequalities are
    recorded; structural guarantees are always asserted.
    """
    variant = params.variant
    rep = RunReport(variant, "candidate")
    if variant == "robust":
        bounds = compute_radius_bounds(inst, sparse, f, params.rho, params.delta)
    elif variant == "knapsack":
        bounds = knapsack_radius_bounds(inst, sparse, f, params.rho, params.delta)
    else:
        bounds = None
    if checks is not None and variant == "robust":
        checks["density"] = check_density_property(inst, sparse, bounds, f, params.rho, params.delta)
    ext = build_ext_lp(inst, params, f, sparse, bounds)
    try:
        x, y, ext_opt, _ = ext.solve()
    except Infeasible as exc:
        raise Rejected(f"relaxation infeasible: {exc}") from None
    rep.lp_opt = ext_opt
    lam1 = params.lam1
    if checks is not None:
        if variant == "robust":
            checks["extlp_bound"] = ext_opt <= lam1 * (2 + params.delta) / 2 * sparse.U_prime
        elif variant == "knapsack":
            checks["extlp_bound"] = ext_opt <= lam1 * sparse.U_prime
        elif V_star is not None:
            checks["extlp_bound"] = ext_opt <= lam1 * V_star
    clients = list(ext.info["clients"])
    scale = star_scale(variant, params.delta)
    copies, ystar, Fj = duplicate_and_balance(inst, x, y, clients, f, scale)
    if sum(ystar[c] for c in copies) != sum(y.values()):
        raise RoundingError("duplication changed the total opening")
    S0 = ext.info["S0"]
    st = init_state(inst, params, f, copies, ystar, Fj, clients, S0,
                    bounds.R if bounds else None, sparse.U if sparse else None, ext.info["m_prime"])
    priced = aux_objective(st, ystar)
    trace = RoundingTrace()
    yv = iterative_round(st, trace)
    rep.aux_objectives = trace.objectives
    rep.iters = len(trace.objectives)
    rep.frac_count = trace.fractional
    if checks is not None:
        checks["reprice"] = ext_opt >= priced >= trace.objectives[0]
    checks_struct = {"monotone": all(a >= b for a, b in zip(trace.objectives, trace.objectives[1:])),
                     "frac_le_2": trace.fractional <= 2, "property": not trace.property_failures}
    if checks is not None:
        checks.update(checks_struct)
    yhat, note = fix_fractional(st, yv)
    rep.fix_note = note
    opened = opened_locations(inst, copies, yhat)
    if not opened:
        raise Rejected("rounding opened no facility")
    sol = complete_solution(inst, opened, sparse, f, params.delta)
    rep.solution = sol
    rep.cost = evaluate_solution(inst, sol)[1]
    if sparse is not None:
        rep.sparse = {"clients": list(sparse.clients), "m_prime": sparse.m_prime, "S0": list(sparse.S0),
                      "U": sparse.U, "U_prime": sparse.U_prime}
    return rep


def _zero_report(inst, variant, mode, opt: ExactOptimum) -> RunReport:
    rep = RunReport(variant, mode, opt.solution, opt.opt_value, opt.opt_value)
    rep.checks["zero_opt"] = True
    return rep


def solve_oracle_assisted(inst: Instance, params: ReductionParams, opt: ExactOptimum | None = None) -> RunReport:
    t0 = time.perf_counter()
    check_entry(inst, params)
    variant = params.variant
    opt = opt or solve_exact(inst)
    if opt.opt_value == 0:
        rep = _zero_report(inst, variant, "oracle", opt)
        rep.wall_ms = int(1000 * (time.perf_counter() - t0))
        return rep
    g = correct_guesses(inst, opt, params.eps)
    f = g.cost_function()
    red = reduced_optimum(inst, f)
    V_star = red.opt_value
    checks: dict = {}
    if variant == "matroid":
        sparse = None
    else:
        U = guess_U(inst, f, params.eps, V_star)
        checks["U_range"] = V_star <= U < (1 + params.eps) * V_star
        sparse = build_sparse_instance(inst, f, U, params.rho, params.delta, red)
        sc = check_sparse_conditions(inst, sparse, f, params.rho, params.delta, red)
        checks.update(sc)
    rep = run_candidate(inst, params, f, sparse, checks, V_star)
    rep.mode = "oracle"
    rep.opt = opt.opt_value
    rep.checks = checks
    rep.guess = {"o1": g.o1, "slopes": list(g.slopes), "V_star": V_star}
    rep.candidates = 1
    rep.wall_ms = int(1000 * (time.perf_counter() - t0))
    return rep


def solve_enumerate(inst: Instance, params: ReductionParams, cap: int = 100_000,
                    opt_value=None) -> RunReport:
    """Every guess, U and sparse configuration end to end; best true cost wins."""
    t0 = time.perf_counter()
    check_entry(inst, params)
    variant = params.variant
    best = None
    count = rejected = 0
    truncated = False
    for g in enumerate_guesses(inst, params.eps):
        f = g.cost_function()
        if variant == "matroid":
            configs = [None]
        else:
            configs = (sp for U in U_grid(inst, f, params.eps)
                       for sp in enumerate_sparse_instances(inst, params.rho, params.delta, U,
                                                            full_service=(variant == "knapsack")))
        for sp in configs:
            if count >= cap:
                truncated = True
                break
            count += 1
            try:
                rep = run_candidate(inst, params, f, sp)
            except Rejected:
                rejected += 1
                continue
            if best is None or rep.cost < best.cost:
                best = rep
                best.guess = {"o1": g.o1, "slopes": list(g.slopes)}
        if truncated:
            break
    if best is None:
        raise EnumerationFailed(f"no feasible candidate among {count} (truncated={truncated})")
    best.mode = "enumerate"
    best.candidates, best.rejected, best.truncated = count, rejected, truncated
    best.opt = opt_value
    best.wall_ms = int(1000 * (time.perf_counter() - t0))
    return best


def _solve(variant, inst, params=None, mode="oracle", cap=100_000, opt=None) -> RunReport:
    params = params or preset(variant)
    if mode == "oracle":
        return solve_oracle_assisted(inst, params, opt)
    if mode == "enumerate":
        return solve_enumerate(inst, params, cap, opt.opt_value if opt else None)
    raise ValueError(f"unknown mode {mode!r}")


def solve_robust(inst, params=None, mode="oracle", cap=100_000, opt=None) -> RunReport:
    return _solve("robust", inst, params, mode, cap, opt)


def solve_matroid(inst, params=None, mode="oracle", cap=100_000, opt=None) -> RunReport:
    return _solve("matroid", inst, params, mode, cap, opt)


def solve_knapsack(inst, params=None, mode="oracle", cap=100_000, opt=None) -> RunReport:
    return _solve("knapsack", inst, params, mode, cap, opt)


def solve_reduction(inst, params=None, mode="oracle", cap=100_000, opt=None) -> RunReport:
    return _solve(variant_name(inst), inst, params, mode, cap, opt)
