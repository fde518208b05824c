"""The strengthened relaxation solved before rounding."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import ExplicitMatroid, Instance, Knapsack, MatroidVariant, PartitionMatroid, Robust, q
from ..lp import EQ, GE, LE, Constraint, LinearProgram, solve_basic, solve_with_generation


class ExtLPError(ValueError):
    pass


def matroid_rank_rows(matroid, name_of, facilities) -> list[Constraint]:
    """Explicit rank rows: one per part of a partition matroid."""
    if isinstance(matroid, PartitionMatroid):
        return [Constraint({name_of[i]: 1 for i in part}, LE, cap, f"rank:part{k}")
                for k, (part, cap) in enumerate(zip(matroid.parts, matroid.capacities))]
    return []


def matroid_separation(matroid, groups: dict):
    """Lazy rank rows for an explicit matroid.

    ``groups`` maps each original facility to the LP variable names standing
    for it; every subset A is checked for y(groups(A)) <= rank(A).
    """
    if not isinstance(matroid, ExplicitMatroid):
        return None
    fac = list(groups)
    ranks = {}
    for s in range(1, len(fac) + 1):
        for A in itertools.combinations(fac, s):
            ranks[A] = matroid.rank(A)

    def oracle(values):
        worst = None
        for A, r in ranks.items():
            lhs = sum((values.get(v, 0) for i in A for v in groups[i]), Fraction(0))
            if lhs > r and (worst is None or lhs - r > worst[0]):
                worst = (lhs - r, A, r)
        if worst is None:
            return None
        _, A, r = worst
        return Constraint({v: 1 for i in A for v in groups[i]}, LE, r,
                          "rank:" + ",".join(str(i) for i in A))
    return oracle


@dataclass
class ExtLP:
    lp: LinearProgram
    pairs: list  # (i, j) with an x variable
    xname: dict
    yname: dict
    oracle: object = None
    info: dict = field(default_factory=dict)

    def solve(self):
        sol = solve_with_generation(self.lp, self.oracle) if self.oracle else solve_basic(self.lp)
        x = {p: sol.values[self.xname[p]] for p in self.pairs}
        y = {i: sol.values[v] for i, v in self.yname.items()}
        return x, y, sol.objective_value, sol


def star_scale(variant: str, delta) -> Fraction:
    """Argument scaling in the star and pruning tests (2/(2+delta) for robust)."""
    return 2 / (2 + q(delta)) if variant == "robust" else Fraction(1)


def build_ext_lp(inst: Instance, params, f, sparse=None, bounds=None) -> ExtLP:
    """Variables x_ij over allowed pairs, y_i over facilities.

    robust:   sum x >= m', sum_i x_ij <= 1, sum y = k
    knapsack: sum_i x_ij = 1, sum wt y <= W
    matroid:  sum_i x_ij = 1, rank rows (no sparsity rows)
    plus x <= y <= 1, y = 1 on S0, radius and star-pruning rows, star rows.
    """
    variant = params.variant
    lam1 = params.lam1
    if variant == "robust" and not 0 < lam1 <= 2 / (2 + params.delta):
        raise ExtLPError("lambda1 must lie in (0, 2/(2+delta)]")
    if variant != "robust" and not 0 < lam1 <= 1:
        raise ExtLPError("lambda1 must lie in (0, 1]")
    v = inst.variant
    expected = {"robust": Robust, "knapsack": Knapsack, "matroid": MatroidVariant}[variant]
    if not isinstance(v, expected):
        raise ExtLPError(f"{variant} relaxation on a {type(v).__name__} instance")
    lp = LinearProgram(f"ext-{variant}")
    F = inst.facilities
    fidx = {i: a for a, i in enumerate(F)}
    cidx = {j: b for b, j in enumerate(inst.clients)}
    if variant == "matroid":
        Cp, S0, mp = list(inst.clients), (), len(inst.clients)
    else:
        Cp, S0, mp = list(sparse.clients), tuple(sparse.S0), sparse.m_prime
    S0set = set(S0)
    scale = star_scale(variant, params.delta)
    thr = params.rho * sparse.U if sparse is not None else None
    yname = {i: lp.add_var(f"y{fidx[i]}", 0, 1) for i in F}
    pairs, xname = [], {}
    for j in Cp:
        for i in F:
            d = inst.d(i, j)
            if variant != "matroid":
                if d > bounds.R[j]:
                    continue
                if i not in S0set and f(scale * d) > thr:
                    continue
            xname[(i, j)] = lp.add_var(f"x{fidx[i]}_{cidx[j]}", 0)
            pairs.append((i, j))
    by_client = {j: [p for p in pairs if p[1] == j] for j in Cp}
    for j in Cp:
        row = {xname[p]: 1 for p in by_client[j]}
        if variant == "robust":
            lp.add_constraint(row, LE, 1, f"assign{cidx[j]}")
        else:
            lp.add_constraint(row, EQ, 1, f"assign{cidx[j]}")
    if variant == "robust":
        lp.add_constraint({xname[p]: 1 for p in pairs}, GE, mp, "coverage")
        lp.add_constraint({yname[i]: 1 for i in F}, EQ, v.k, "cardinality")
    elif variant == "knapsack":
        lp.add_constraint({yname[i]: v.wt[i] for i in F if v.wt[i]}, LE, v.W, "knapsack")
    for p in pairs:
        lp.add_constraint({xname[p]: 1, yname[p[0]]: -1}, LE, 0, f"open{fidx[p[0]]}_{cidx[p[1]]}")
    for i in S0:
        lp.add_constraint({yname[i]: 1}, EQ, 1, f"pre{fidx[i]}")
    if variant != "matroid":
        for i in F:
            if i in S0set:
                continue
            row = {xname[(i, j)]: f(scale * inst.d(i, j)) for j in Cp if (i, j) in xname}
            row = {k: a for k, a in row.items() if a}
            row[yname[i]] = -thr
            lp.add_constraint(row, LE, 0, f"star{fidx[i]}")
    oracle = None
    if variant == "matroid":
        for c in matroid_rank_rows(v.matroid, yname, F):
            lp.add(c)
        oracle = matroid_separation(v.matroid, {i: [yname[i]] for i in F})
    lp.set_objective({xname[p]: f(lam1 * inst.d(*p)) for p in pairs})
    return ExtLP(lp, pairs, xname, yname, oracle, {"clients": Cp, "S0": S0, "m_prime": mp})
