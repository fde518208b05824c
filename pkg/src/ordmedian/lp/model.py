"""Exact linear programs: variables with rational bounds, named rows, one objective."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..core import q

LE, EQ, GE = "<=", "=", ">="


class LPError(Exception):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


class RoundLimit(LPError):
    pass


@dataclass
class Constraint:
    coeffs: dict
    sense: str
    rhs: Fraction
    name: str = ""

    def lhs(self, values) -> Fraction:
        return sum((a * values.get(v, 0) for v, a in self.coeffs.items()), Fraction(0))

    def slack(self, values) -> Fraction:
        """Non-negative iff satisfied (for '=' the absolute gap, negated)."""
        lhs = self.lhs(values)
        if self.sense == LE:
            return self.rhs - lhs
        if self.sense == GE:
            return lhs - self.rhs
        return -abs(lhs - self.rhs)

    def satisfied(self, values) -> bool:
        return self.slack(values) >= 0

    def tight(self, values) -> bool:
        return self.lhs(values) == self.rhs


@dataclass
class BasicSolution:
    values: dict
    objective_value: Fraction
    basis: frozenset
    rounds: int = 1
    cuts: list = field(default_factory=list)

    def __getitem__(self, name):
        return self.values[name]


class LinearProgram:
    def __init__(self, name: str = ""):
        self.name = name
        self.vars: list = []
        self.lo: dict = {}
        self.hi: dict = {}
        self.constraints: list[Constraint] = []
        self.objective: dict = {}
        self.obj_constant = Fraction(0)
        self.sense = "min"

    # construction -------------------------------------------------------
    def add_var(self, name, lo=0, hi=None):
        if name in self.lo:
            raise LPError(f"duplicate variable {name!r}")
        lo = None if lo is None else q(lo)
        hi = None if hi is None else q(hi)
        if lo is not None and hi is not None and lo > hi:
            raise LPError(f"bounds of {name!r} inconsistent: {lo} > {hi}")
        self.vars.append(name)
        self.lo[name] = lo
        self.hi[name] = hi
        return name

    def add_constraint(self, coeffs, sense, rhs, name=None) -> Constraint:
        if sense not in (LE, EQ, GE):
            raise LPError(f"unknown relation {sense!r}")
        clean = {}
        for v, a in coeffs.items():
            if v not in self.lo:
                raise LPError(f"constraint {name!r} references undeclared variable {v!r}")
            a = q(a)
            if a:
                clean[v] = clean.get(v, Fraction(0)) + a
        c = Constraint(clean, sense, q(rhs), name if name is not None else f"c{len(self.constraints)}")
        self.constraints.append(c)
        return c

    def add(self, c: Constraint) -> Constraint:
        return self.add_constraint(c.coeffs, c.sense, c.rhs, c.name)

    def set_objective(self, coeffs, sense="min", constant=0):
        if sense not in ("min", "max"):
            raise LPError("sense must be 'min' or 'max'")
        for v in coeffs:
            if v not in self.lo:
                raise LPError(f"objective references undeclared variable {v!r}")
        self.objective = {v: q(a) for v, a in coeffs.items() if q(a)}
        self.obj_constant = q(constant)
        self.sense = sense

    def copy(self) -> "LinearProgram":
        lp = LinearProgram(self.name)
        lp.vars = list(self.vars)
        lp.lo = dict(self.lo)
        lp.hi = dict(self.hi)
        lp.constraints = [Constraint(dict(c.coeffs), c.sense, c.rhs, c.name) for c in self.constraints]
        lp.objective = dict(self.objective)
        lp.obj_constant = self.obj_constant
        lp.sense = self.sense
        return lp

    # evaluation ---------------------------------------------------------
    def evaluate(self, values) -> Fraction:
        return self.obj_constant + sum((a * values.get(v, 0) for v, a in self.objective.items()),
                                       Fraction(0))

    def violations(self, values) -> list[str]:
        bad = []
        for v in self.vars:
            x = values.get(v, Fraction(0))
            if self.lo[v] is not None and x < self.lo[v]:
                bad.append(f"{v}={x} below {self.lo[v]}")
            if self.hi[v] is not None and x > self.hi[v]:
                bad.append(f"{v}={x} above {self.hi[v]}")
        for c in self.constraints:
            if not c.satisfied(values):
                bad.append(f"{c.name}: lhs {c.lhs(values)} {c.sense} {c.rhs} fails")
        return bad

    def is_feasible(self, values) -> bool:
        return not self.violations(values)

    def dump(self) -> str:
        """Plain-text listing, one line per row, rationals as p/q."""
        def term(a, v):
            return f"{a} {v}"
        lines = [f"{self.sense} " + " + ".join(term(a, v) for v, a in self.objective.items())
                 + (f" + {self.obj_constant}" if self.obj_constant else "")]
        for c in self.constraints:
            lines.append(f"{c.name}: " + " + ".join(term(a, v) for v, a in c.coeffs.items())
                         + f" {c.sense} {c.rhs}")
        for v in self.vars:
            lines.append(f"bounds {self.lo[v]} <= {v} <= {self.hi[v]}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"LinearProgram({self.name!r}, vars={len(self.vars)}, rows={len(self.constraints)})"
