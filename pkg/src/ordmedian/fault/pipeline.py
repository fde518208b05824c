"""Fault-tolerant driver: guesses, FT(w~), splitting, bundles, laminar balls, sampling."""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import (FaultTolerant, Instance, InstanceError, Solution, complete, evaluate_solution, q,
                    truncated_distance, validate_metric)
from ..oracle import ExactOptimum, correct_guesses, enumerate_guesses, solve_exact
from .bundles import BundleFamily, create_bundles
from .laminar import LaminarFamily, build_laminar, filter_dangerous
from .lp import build_ft_lp
from .rounding import AuxPolytope, build_aux_polytope, stochastic_round
from .split import FractionalFt, split_facilities

DEFAULT_EPS = Fraction(1, 4)
DEFAULT_DELTA = Fraction(1, 4)
CORE_AVG = 3
CORE_T = Fraction(4356, 10)
CORE_TAIL = Fraction(2267, 10)


class FtEnumerationFailed(RuntimeError):
    pass


@dataclass
class FtRounding:
    """Everything fixed before sampling starts."""
    ft: FractionalFt
    bundles: BundleFamily
    laminar: LaminarFamily
    aux: AuxPolytope


@dataclass
class FtReport:
    variant: str = "fault_tolerant"
    mode: str = "oracle"
    solution: Solution | None = None
    cost: Fraction | None = None
    opt: Fraction | None = None
    lp_opt: Fraction | None = None
    R: dict = field(default_factory=dict)
    samples: int = 0
    mean_cost: Fraction | None = None
    min_cost: Fraction | None = None
    max_cost: Fraction | None = None
    guess: dict = field(default_factory=dict)
    structure: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    lemma3_flags: list = field(default_factory=list)
    marginals: dict = field(default_factory=dict)
    candidates: int = 0
    truncated: bool = False
    wall_ms: int = 0
    iters: int = 0
    frac_count: int = 0

    @property
    def ratio(self):
        if self.opt is None or self.cost is None or self.opt == 0:
            return None
        return self.cost / self.opt

    @property
    def mean_ratio(self):
        if self.opt is None or self.mean_cost is None or self.opt == 0:
            return None
        return self.mean_cost / self.opt

    def trace(self) -> dict:
        return {
            "variant": self.variant, "mode": self.mode,
            "open": list(self.solution.open) if self.solution else None,
            "cost": self.cost, "opt": self.opt, "lp_opt": self.lp_opt,
            "R": {str(k): v for k, v in self.R.items()},
            "samples": self.samples, "mean_cost": self.mean_cost,
            "min_cost": self.min_cost, "max_cost": self.max_cost,
            "guess": self.guess, "structure": self.structure, "checks": self.checks,
            "lemma3_flags": self.lemma3_flags, "marginals": self.marginals,
            "candidates": self.candidates, "truncated": self.truncated,
        }


def check_ft_entry(inst: Instance) -> FaultTolerant:
    v = inst.variant
    if not isinstance(v, FaultTolerant):
        raise InstanceError("fault-tolerant pipeline on a non fault-tolerant instance")
    if v.k < max(v.r.values()):
        raise InstanceError(f"k={v.k} is below the largest requirement {max(v.r.values())}")
    validate_metric(inst.metric)
    return v


def prepare_rounding(inst: Instance, x: dict, y: dict) -> FtRounding:
    ft = split_facilities(x, y, inst)
    fam = create_bundles(ft)
    D, Dp = filter_dangerous(ft)
    lam = build_laminar(Dp, ft, D)
    aux = build_aux_polytope(ft, fam, lam, inst.variant.k)
    aux.decomposition()
    return FtRounding(ft, fam, lam, aux)


def sample_stream(seed, n: int):
    """Independent per-sample generators derived from the master seed."""
    return [random.Random(f"{seed}:sample:{s}") for s in range(n)]


def lemma3_flags(inst: Instance, rnd: FtRounding, per_client: dict, thresholds: dict) -> list:
    """Clients whose mean r_j-th service cost exceeds the core bound plus 5 standard errors."""
    ft = rnd.ft
    out = []
    for j in inst.clients:
        vals = per_client[j]
        n = len(vals)
        mean = sum(vals, Fraction(0)) / n
        var = float(sum((v - mean) ** 2 for v in vals)) / max(1, n - 1)
        slack = 5 * math.sqrt(var / n)
        for ell, T in thresholds.items():
            tail = sum((a * truncated_distance(inst.d(i, j), T) for (i, jj), a in ft.x_orig.items() if jj == j),
                       Fraction(0))
            bound = CORE_AVG * ft.lp_cost(j) + CORE_T * T + CORE_TAIL * tail
            if float(mean) > float(bound) + slack:
                out.append({"client": j, "ell": ell, "mean": mean, "bound": bound})
    return out


def marginal_summary(rnd: FtRounding, counts: dict, ball_hits: dict, n: int) -> dict:
    """Largest deviation, in binomial standard deviations, of open frequencies from y."""
    worst = 0.0
    ft = rnd.ft
    for c in ft.copies:
        p = float(ft.y[c])
        sd = math.sqrt(n * p * (1 - p))
        dev = abs(counts[c] - n * p)
        if sd > 0:
            worst = max(worst, dev / sd)
        elif dev:
            worst = math.inf
    worst_ball = 0.0
    for j, S in rnd.laminar.B_prime.items():
        p = float(ft.volume(S) - (ft.r(j) - 1))
        sd = math.sqrt(n * p * (1 - p))
        dev = abs(ball_hits[j] - n * p)
        if sd > 0:
            worst_ball = max(worst_ball, dev / sd)
        elif dev:
            worst_ball = math.inf
    return {"copies_max_sigma": worst, "balls_max_sigma": worst_ball, "n": n}


def run_rounding(inst: Instance, rnd: FtRounding, n_samples: int, seed, thresholds: dict | None = None) -> dict:
    """n_samples independent roundings; best sample, cost statistics and check summaries."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    ft = rnd.ft
    counts = {c: 0 for c in ft.copies}
    ball_hits = {j: 0 for j in rnd.laminar.B_prime}
    per_client = {j: [] for j in inst.clients}
    best = None
    costs = []
    for rng in sample_stream(seed, n_samples):
        s = stochastic_round(ft, rnd.bundles, rnd.laminar, inst.variant.k, rng, rnd.aux)
        for c, zc in s.z.items():
            counts[c] += zc
        for j, S in rnd.laminar.B_prime.items():
            if sum(s.z[c] for c in S) == ft.r(j):
                ball_hits[j] += 1
        sol = complete(inst, s.opened)
        vec, cost = evaluate_solution(inst, sol)
        for j, cj in zip(inst.clients, vec):
            per_client[j].append(cj)
        costs.append(cost)
        if best is None or cost < best[0]:
            best = (cost, sol)
    out = {"best": best[1], "cost": best[0], "mean": sum(costs, Fraction(0)) / len(costs),
           "min": min(costs), "max": max(costs), "marginals": marginal_summary(rnd, counts, ball_hits, n_samples)}
    out["lemma3"] = lemma3_flags(inst, rnd, per_client, thresholds) if thresholds else []
    return out


def structure_of(rnd: FtRounding) -> dict:
    return {"copies": len(rnd.ft.copies), "bundles": len(rnd.bundles.bundles),
            "dangerous": len(rnd.laminar.D), "filtered": len(rnd.laminar.D_prime),
            "decomposition_terms": len(rnd.aux.decomposition().terms)}


def _candidate(inst, guess, n_samples, seed) -> FtReport:
    lp = build_ft_lp(inst, guess)
    x, y, R, sol = lp.solve()
    rnd = prepare_rounding(inst, x, y)
    res = run_rounding(inst, rnd, n_samples, seed, lp.thresholds)
    rep = FtReport(solution=res["best"], cost=res["cost"], lp_opt=sol.objective_value, R=R,
                   samples=n_samples, mean_cost=res["mean"], min_cost=res["min"], max_cost=res["max"])
    rep.iters = getattr(sol, "rounds", 0)
    rep.frac_count = sum(1 for v in y.values() if v.denominator != 1)
    rep.structure = structure_of(rnd)
    rep.lemma3_flags = res["lemma3"]
    rep.marginals = res["marginals"]
    rep.guess = {"xi1": guess.xi1, "T": {str(k): v for k, v in guess.T.items()}, "pos": list(guess.pos)}
    return rep


def solve_ft(inst: Instance, eps=DEFAULT_EPS, delta=DEFAULT_DELTA, mode: str = "oracle", n_samples: int = 200,
             seed=0, cap: int = 100_000, opt: ExactOptimum | None = None) -> FtReport:
    """Oracle-assisted (guesses from the exact optimum) or enumerated guesses.

    The returned solution is the best sample; ``mean_cost`` is the empirical
    expectation that the approximation guarantee speaks about.
    """
    t0 = time.perf_counter()
    check_ft_entry(inst)
    eps, delta = q(eps), q(delta)
    if mode == "oracle":
        opt = opt or solve_exact(inst)
        g = correct_guesses(inst, opt, eps, delta)
        rep = _candidate(inst, g, n_samples, seed)
        rep.opt = opt.opt_value
        n = len(inst.clients)
        xi = opt.xi
        rep.checks["lp_le_opt"] = rep.lp_opt <= opt.opt_value
        rep.checks["guess_range"] = all(xi[l - 1] < g.T[l] < (1 + eps) * xi[l - 1] + eps * xi[0] / n
                                        for l in g.pos) if xi[0] > 0 else True
        rep.candidates = 1
    elif mode == "enumerate":
        rep = None
        stream = enumerate_guesses(inst, eps, delta, cap)
        count = 0
        for g in stream:
            count += 1
            cand = _candidate(inst, g, n_samples, seed)
            if rep is None or cand.mean_cost < rep.mean_cost:
                rep = cand
        if rep is None:
            raise FtEnumerationFailed(f"no candidate among {count} (truncated={stream.truncated})")
        rep.mode = "enumerate"
        rep.candidates, rep.truncated = count, stream.truncated
        rep.opt = opt.opt_value if opt else None
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rep.checks["lemma3_clean"] = not rep.lemma3_flags
    rep.wall_ms = int(1000 * (time.perf_counter() - t0))
    return rep
