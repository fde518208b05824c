"""Top-LP and FT(w~): relaxations with lazily separated Top-ell rows."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..core import FaultTolerant, Instance, InstanceError, next_pos, q, truncated_distance
from ..lp import EQ, LE, LinearProgram, solve_with_generation, top_ell_oracle

TOP_MULT = Fraction(1001, 1000)


@dataclass
class FtLP:
    lp: LinearProgram
    xname: dict  # (i, j) -> var
    yname: dict  # i -> var
    Rname: dict  # ell -> var
    oracle: object
    thresholds: dict  # ell -> threshold used in the truncated-mass row
    info: dict = field(default_factory=dict)

    def solve(self):
        sol = solve_with_generation(self.lp, self.oracle)
        x = {p: sol.values[v] for p, v in self.xname.items()}
        y = {i: sol.values[v] for i, v in self.yname.items()}
        R = {ell: sol.values[v] for ell, v in self.Rname.items()}
        return x, y, R, sol


def _require_ft(inst: Instance):
    v = inst.variant
    if not isinstance(v, FaultTolerant):
        raise InstanceError("fault-tolerant relaxation on a non fault-tolerant instance")
    if v.k < max(v.r.values()):
        raise InstanceError(f"k={v.k} is below the largest requirement {max(v.r.values())}")
    return v


def _skeleton(inst: Instance, name: str):
    v = _require_ft(inst)
    lp = LinearProgram(name)
    fidx = {i: a for a, i in enumerate(inst.facilities)}
    cidx = {j: b for b, j in enumerate(inst.clients)}
    yname = {i: lp.add_var(f"y{fidx[i]}", 0, 1) for i in inst.facilities}
    xname = {}
    for j in inst.clients:
        for i in inst.facilities:
            xname[(i, j)] = lp.add_var(f"x{fidx[i]}_{cidx[j]}", 0)
    for j in inst.clients:
        lp.add_constraint({xname[(i, j)]: 1 for i in inst.facilities}, EQ, v.r[j], f"demand{cidx[j]}")
    lp.add_constraint({yname[i]: 1 for i in inst.facilities}, EQ, v.k, "cardinality")
    for (i, j), xv in xname.items():
        lp.add_constraint({xv: 1, yname[i]: -1}, LE, 0, f"open{fidx[i]}_{cidx[j]}")
    return lp, xname, yname


def _threshold_row(inst, lp, xname, Rv, T, label):
    row = {}
    for (i, j), xv in xname.items():
        a = truncated_distance(inst.d(i, j), T)
        if a:
            row[xv] = a
    row[Rv] = -1
    lp.add_constraint(row, LE, 0, label)


def _client_terms(inst, xname) -> dict:
    terms = {j: {} for j in inst.clients}
    for (i, j), xv in xname.items():
        d = inst.d(i, j)
        if d:
            terms[j][xv] = d
    return terms


def _joint_oracle(oracles):
    def oracle(values):
        out = []
        for o in oracles:
            out.extend(o(values))
        return out
    return oracle


def build_top_lp(inst: Instance, ell: int, T_ell) -> FtLP:
    """min R subject to the truncated-mass row at 1001/1000 T, lazy Top-ell rows,
    demands, cardinality and x <= y <= 1."""
    n = len(inst.clients)
    if not 1 <= ell <= n:
        raise ValueError(f"ell={ell} outside [1, {n}]")
    T_ell = q(T_ell)
    if T_ell < 0:
        raise ValueError("threshold must be non-negative")
    lp, xname, yname = _skeleton(inst, f"top-{ell}")
    Rv = lp.add_var(f"R{ell}", 0)
    thr = TOP_MULT * T_ell
    _threshold_row(inst, lp, xname, Rv, thr, f"trunc{ell}")
    lp.set_objective({Rv: 1})
    oracle = top_ell_oracle(_client_terms(inst, xname), ell, Rv, name=f"top{ell}")
    return FtLP(lp, xname, yname, {ell: Rv}, oracle, {ell: thr}, {"ell": ell})


def build_ft_lp(inst: Instance, guess) -> FtLP:
    """FT(w~) for the guessed thresholds ``guess.T`` over ``guess.pos``."""
    n = len(inst.clients)
    pos = list(guess.pos)
    wt = list(guess.w_tilde) + [Fraction(0)]
    if not pos or len(wt) != n + 1:
        raise ValueError("guess does not match the instance")
    lp, xname, yname = _skeleton(inst, "ft")
    Rname, obj, oracles = {}, {}, []
    terms = _client_terms(inst, xname)
    for ell in pos:
        Rv = lp.add_var(f"R{ell}", 0)
        Rname[ell] = Rv
        coef = wt[ell - 1] - wt[next_pos(pos, ell, n) - 1]
        if coef:
            obj[Rv] = coef
        _threshold_row(inst, lp, xname, Rv, q(guess.T[ell]), f"trunc{ell}")
        oracles.append(top_ell_oracle(terms, ell, Rv, name=f"top{ell}"))
    lp.set_objective(obj)
    return FtLP(lp, xname, yname, Rname, _joint_oracle(oracles), {ell: q(guess.T[ell]) for ell in pos},
                {"pos": pos})
