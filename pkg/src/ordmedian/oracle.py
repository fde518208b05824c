"""Brute-force optima for desk-scale instances and the guesses derived from them.

Serving the m closest clients is optimal for the robust variant: w is
non-negative and non-increasing, so swapping a served client for a closer
unserved one never raises any entry of the sorted cost vector.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (FaultTolerant, Instance, Knapsack, MatroidVariant, Robust, Solution, best_served,
                   complete, d_set, evaluate_solution, nearest_facilities, ordered_cost, pad_weights,
                   pos_set, q, sparsify_weights)
from .costfn import (CostFunction, average_weights, interval_count, power_ceil, slope_grid)

DEFAULT_BUDGET = 20_000_000


class BudgetExceeded(RuntimeError):
    pass


class NoFeasibleSet(RuntimeError):
    pass


@dataclass
class ExactOptimum:
    open: tuple
    served: tuple
    opt_value: Fraction
    assignment: dict  # client -> list of facilities
    costs: dict  # client -> service cost c*_j
    xi: list  # connection distances, non-increasing

    @property
    def solution(self) -> Solution:
        return Solution(self.open, self.served, self.assignment)

    def kappa(self, inst: Instance, p):
        """Nearest optimal facility to any point p (ties by facility order)."""
        return nearest_facilities(inst, p, self.open, 1)[0]

    def c_star(self, inst: Instance, p) -> Fraction:
        return d_set(inst, p, self.open)


def _candidates(inst: Instance):
    F = inst.facilities
    v = inst.variant
    if isinstance(v, Robust):
        return (S for s in range(1, v.k + 1) for S in itertools.combinations(F, s))
    if isinstance(v, FaultTolerant):
        return itertools.combinations(F, v.k)
    return (S for s in range(1, len(F) + 1) for S in itertools.combinations(F, s)
            if inst.is_feasible_open(S))


def _count_candidates(inst: Instance) -> int:
    nF = len(inst.facilities)
    v = inst.variant
    if isinstance(v, Robust):
        return sum(math.comb(nF, s) for s in range(1, v.k + 1))
    if isinstance(v, FaultTolerant):
        return math.comb(nF, v.k)
    return 2 ** nF


def check_budget(inst: Instance, budget: int = DEFAULT_BUDGET) -> int:
    work = _count_candidates(inst) * len(inst.clients) * max(1, len(inst.facilities))
    if work > budget:
        raise BudgetExceeded(f"brute force needs ~{work} evaluations, budget {budget}")
    return work


def solve_exact(inst: Instance, budget: int = DEFAULT_BUDGET) -> ExactOptimum:
    """Exact optimum of any variant by enumeration of open sets."""
    check_budget(inst, budget)
    v = inst.variant
    if isinstance(v, FaultTolerant) and v.k < max(v.r.values()):
        raise ValueError("k is below the largest requirement")
    best = None
    for S in _candidates(inst):
        sol = complete(inst, S)
        costs, val = evaluate_solution(inst, sol)
        if best is None or val < best[0]:
            best = (val, sol, costs)
    if best is None:
        raise NoFeasibleSet("no feasible non-empty open set")
    val, sol, costs = best
    cost_map = dict(zip(sol.served, costs))
    xi = []
    for j in sol.served:
        xi.extend(inst.d(i, j) for i in sol.assignments[j])
    xi.sort(reverse=True)
    return ExactOptimum(sol.open, sol.served, val, dict(sol.assignments), cost_map, xi)


def solve_robust_exact(inst, budget=DEFAULT_BUDGET):
    assert isinstance(inst.variant, Robust)
    return solve_exact(inst, budget)


def solve_matroid_exact(inst, budget=DEFAULT_BUDGET):
    assert isinstance(inst.variant, MatroidVariant)
    return solve_exact(inst, budget)


def solve_knapsack_exact(inst, budget=DEFAULT_BUDGET):
    assert isinstance(inst.variant, Knapsack)
    return solve_exact(inst, budget)


def solve_ft_exact(inst, budget=DEFAULT_BUDGET):
    assert isinstance(inst.variant, FaultTolerant)
    return solve_exact(inst, budget)


def served_by_subset_bruteforce(inst: Instance, opened) -> Fraction:
    """Min ordered cost over every served set of size m (cross-check of best_served)."""
    m = inst.variant.m
    dist = {j: d_set(inst, j, opened) for j in inst.clients}
    return min(ordered_cost(inst.w, [dist[j] for j in T]) for T in itertools.combinations(inst.clients, m))


# ---------------------------------------------------------------------------
# guesses


@dataclass
class GuessBundle:
    eps: Fraction
    # single-assignment variants: the surrogate cost function
    o1: Fraction | None = None
    slopes: tuple = ()
    m: int = 0
    # fault-tolerant: thresholds over POS
    xi1: Fraction | None = None
    pos: tuple = ()
    T_prime: dict = field(default_factory=dict)
    T: dict = field(default_factory=dict)
    w_tilde: tuple = ()
    delta: Fraction | None = None

    def cost_function(self) -> CostFunction:
        return CostFunction(self.o1, self.eps, self.m, tuple(self.slopes))

    def key(self):
        return (self.o1, tuple(self.slopes), self.xi1, tuple(sorted(self.T_prime.items())))


def surrogate_weights(inst: Instance, eps) -> list[Fraction]:
    return pad_weights(list(inst.w), eps)


def correct_guesses(inst: Instance, opt: ExactOptimum, eps, delta=None) -> GuessBundle:
    eps = q(eps)
    if isinstance(inst.variant, FaultTolerant):
        return _ft_guess(inst, opt, eps, q(delta if delta is not None else eps))
    m = inst.n_served
    wt = surrogate_weights(inst, eps)
    costs = sorted(opt.costs.values(), reverse=True)
    o1 = costs[0]
    if o1 == 0:
        return GuessBundle(eps, o1=Fraction(0), slopes=(wt[0],), m=m)
    wbar = average_weights(costs, wt, o1, eps, m)
    slopes = []
    for wb in wbar:
        s = power_ceil(wb, eps)
        assert wb <= s < (1 + eps) * wb, "slope rounding left the grid"
        slopes.append(s)
    return GuessBundle(eps, o1=o1, slopes=tuple(slopes), m=m)


def ft_threshold_grid(xi1: Fraction, eps: Fraction, n: int) -> list[Fraction]:
    """{xi1 (1+eps)^-s : s >= 0} intersected with [eps xi1 / n, inf), descending."""
    if xi1 == 0:
        return [Fraction(0)]
    floor = eps * xi1 / n
    out = [xi1]
    while out[-1] / (1 + eps) >= floor:
        out.append(out[-1] / (1 + eps))
    return out


def ft_thresholds(T_prime: dict, xi1: Fraction, eps: Fraction, n: int) -> dict:
    return {ell: tp + eps * xi1 / n for ell, tp in T_prime.items()}


def _ft_guess(inst, opt, eps, delta) -> GuessBundle:
    n = len(inst.clients)
    pos, wt = sparsify_weights(list(inst.w), delta)
    xi = opt.xi
    xi1 = xi[0]
    grid = ft_threshold_grid(xi1, eps, n)
    floor = eps * xi1 / n
    Tp = {}
    for ell in pos:
        x = xi[ell - 1]
        if xi1 > 0 and x >= floor:
            g = min(v for v in grid if v >= x)
            assert x <= g < (1 + eps) * x, "threshold left the grid"
            Tp[ell] = g
        else:
            Tp[ell] = Fraction(0)
    T = ft_thresholds(Tp, xi1, eps, n)
    return GuessBundle(eps, xi1=xi1, pos=tuple(pos), T_prime=Tp, T=T, w_tilde=tuple(wt), delta=delta)


class GuessStream:
    """Iterable over candidate guesses; ``truncated`` is set once the cap cuts it short."""

    def __init__(self, inst: Instance, eps, delta=None, cap: int | None = None):
        self.inst = inst
        self.eps = q(eps)
        self.delta = q(delta) if delta is not None else self.eps
        self.cap = cap
        self.truncated = False
        self.count = 0

    def _raw(self):
        inst, eps = self.inst, self.eps
        dists = inst.metric.distance_set(positive_only=True)
        if isinstance(inst.variant, FaultTolerant):
            n = len(inst.clients)
            pos, wt = sparsify_weights(list(inst.w), self.delta)
            yield GuessBundle(eps, xi1=Fraction(0), pos=tuple(pos),
                              T_prime={l: Fraction(0) for l in pos},
                              T={l: Fraction(0) for l in pos}, w_tilde=tuple(wt), delta=self.delta)
            for xi1 in dists:
                grid = ft_threshold_grid(xi1, eps, n) + [Fraction(0)]
                for combo in itertools.combinations_with_replacement(range(len(grid)), len(pos)):
                    Tp = {l: grid[c] for l, c in zip(pos, combo)}
                    yield GuessBundle(eps, xi1=xi1, pos=tuple(pos), T_prime=Tp,
                                      T=ft_thresholds(Tp, xi1, eps, n), w_tilde=tuple(wt),
                                      delta=self.delta)
            return
        m = inst.n_served
        wt = surrogate_weights(inst, eps)
        yield GuessBundle(eps, o1=Fraction(0), slopes=(wt[0],), m=m)
        grid = slope_grid(wt, eps)
        length = interval_count(eps, m) + 2
        for o1 in dists:
            for combo in itertools.combinations_with_replacement(range(len(grid)), length):
                yield GuessBundle(eps, o1=o1, slopes=tuple(grid[c] for c in combo), m=m)

    def __iter__(self):
        for g in self._raw():
            if self.cap is not None and self.count >= self.cap:
                self.truncated = True
                return
            self.count += 1
            yield g


def enumerate_guesses(inst: Instance, eps, delta=None, cap: int | None = None) -> GuessStream:
    return GuessStream(inst, eps, delta, cap)


def reduced_value(inst: Instance, f, lam, opened) -> Fraction:
    lam = q(lam)
    vals = sorted(f(lam * d_set(inst, j, opened)) for j in inst.clients)
    return sum(vals[:inst.n_served], Fraction(0))


def reduced_instance_opt(inst: Instance, f, lam, budget: int = DEFAULT_BUDGET,
                         with_argmin: bool = False):
    """min over feasible open sets of sum f(lam d(j,F)) over the served clients."""
    if isinstance(inst.variant, FaultTolerant):
        raise ValueError("the surrogate reduction applies to single-assignment variants")
    check_budget(inst, budget)
    best = None
    for S in _candidates(inst):
        val = reduced_value(inst, f, lam, S)
        if best is None or val < best[0]:
            best = (val, S)
    if best is None:
        raise NoFeasibleSet("no feasible non-empty open set")
    return best if with_argmin else best[0]


def reduced_optimum(inst: Instance, f, budget: int = DEFAULT_BUDGET) -> ExactOptimum:
    """Optimal solution of the reduced instance at lam = 1, as an ExactOptimum."""
    val, S = reduced_instance_opt(inst, f, 1, budget, with_argmin=True)
    order = {j: k for k, j in enumerate(inst.clients)}
    served = sorted(inst.clients, key=lambda j: (f(d_set(inst, j, S)), d_set(inst, j, S), order[j]))
    served = tuple(sorted(served[:inst.n_served], key=order.__getitem__))
    sol = complete(inst, S, served)
    costs = {j: d_set(inst, j, S) for j in served}
    return ExactOptimum(sol.open, served, val, dict(sol.assignments), costs,
                        sorted(costs.values(), reverse=True))
