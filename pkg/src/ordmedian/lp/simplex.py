"""Two-phase primal simplex over exact rationals, Bland's rule.

Rows are stored sparsely as ``{column: int}`` together with a positive
integer scale, so the true tableau row is ``row / scale``.  Pivots only touch
rows with a non-zero entry in the entering column and each touched row is
divided by the gcd of its entries, which keeps the integers small.
"""
from __future__ import annotations

import math
from fractions import Fraction

from .model import EQ, GE, LE, BasicSolution, Infeasible, LinearProgram, LPError, Unbounded

RHS = -1  # column key of the right-hand side


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


def _normalize(row: dict, scale: int):
    g = math.gcd(scale, *row.values()) if row else scale
    if scale < 0:
        g = -g
    if g != 1:
        row = {k: v // g for k, v in row.items()}
        scale //= g
    return row, scale


class _Tableau:
    def __init__(self, rows, scales, basis, ncols):
        self.rows = rows
        self.scales = scales
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r: int, c: int, obj: list):
        """``obj`` is a list of [row, scale] objective rows updated alongside."""
        pr = self.rows[r]
        p = pr[c]
        # the pivot row becomes pr / p
        newr, news = _normalize(dict(pr), p)
        self.rows[r], self.scales[r] = newr, news
        for i, row in enumerate(self.rows):
            if i == r or c not in row:
                continue
            self.rows[i], self.scales[i] = self._eliminate(row, self.scales[i], pr, p, c)
        for o in obj:
            if c in o[0]:
                o[0], o[1] = self._eliminate(o[0], o[1], pr, p, c)
        self.basis[r] = c
        self.pivots += 1

    @staticmethod
    def _eliminate(row, scale, pr, p, c):
        a = row[c]
        out = {k: v * p for k, v in row.items()}
        for k, v in pr.items():
            nv = out.get(k, 0) - a * v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        out.pop(c, None)
        return _normalize(out, scale * p)

    def value(self, i) -> Fraction:
        return Fraction(self.rows[i].get(RHS, 0), self.scales[i])

    def run(self, obj, allowed) -> None:
        """Minimize the objective row obj[0]; ``allowed(col)`` filters entering columns."""
        while True:
            orow = obj[0][0]
            enter = None
            for k, v in orow.items():
                if k != RHS and v < 0 and allowed(k) and (enter is None or k < enter):
                    enter = k
            if enter is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(enter, 0)
                if a <= 0:
                    continue
                b = row.get(RHS, 0)
                if best is None:
                    best = (i, b, a)
                    continue
                _, bb, ba = best
                lhs, rhs = b * ba, bb * a
                if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best[0]]):
                    best = (i, b, a)
            if best is None:
                raise Unbounded("objective unbounded")
            self.pivot(best[0], enter, obj)


class _StandardForm:
    """Maps a LinearProgram onto non-negative columns and integer rows."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        self.colnames: list = []
        self.colmap: dict = {}  # var -> list of (col, sign)
        self.offset: dict = {}  # var -> constant part
        rows = []  # (coeff dict col->Fraction, sense, rhs Fraction, name)
        for v in lp.vars:
            lo, hi = lp.lo[v], lp.hi[v]
            if lo is not None and hi is not None and lo == hi:
                self.colmap[v] = []
                self.offset[v] = lo
            elif lo is not None:
                c = self._col(v)
                self.colmap[v] = [(c, 1)]
                self.offset[v] = lo
                if hi is not None:
                    rows.append(({c: Fraction(1)}, LE, hi - lo, f"ub:{v}"))
            elif hi is not None:
                c = self._col(v)
                self.colmap[v] = [(c, -1)]
                self.offset[v] = hi
            else:
                cp = self._col(f"{v}+")
                cm = self._col(f"{v}-")
                self.colmap[v] = [(cp, 1), (cm, -1)]
                self.offset[v] = Fraction(0)
        for con in lp.constraints:
            coeffs, const = self.translate(con.coeffs)
            rows.append((coeffs, con.sense, con.rhs - const, con.name))
        self.obj, self.obj_const = self.translate(lp.objective)
        self.obj_const += lp.obj_constant
        self.rows = rows

    def _col(self, name) -> int:
        self.colnames.append(name)
        return len(self.colnames) - 1

    def translate(self, coeffs):
        out: dict = {}
        const = Fraction(0)
        for v, a in coeffs.items():
            const += a * self.offset[v]
            for c, s in self.colmap[v]:
                nv = out.get(c, Fraction(0)) + s * a
                if nv:
                    out[c] = nv
                else:
                    out.pop(c, None)
        return out, const

    def recover(self, colvals) -> dict:
        vals = {}
        for v in self.lp.vars:
            x = self.offset[v]
            for c, s in self.colmap[v]:
                x += s * colvals.get(c, 0)
            vals[v] = x
        return vals


def solve_basic(lp: LinearProgram) -> BasicSolution:
    """Optimal basic solution of ``lp`` or raise Infeasible / Unbounded."""
    sf = _StandardForm(lp)
    nstruct = len(sf.colnames)
    names = list(sf.colnames)
    rows, scales, basis, artificial = [], [], [], set()
    for coeffs, sense, rhs, name in sf.rows:
        if not coeffs:
            ok = (rhs >= 0) if sense == LE else (rhs <= 0) if sense == GE else rhs == 0
            if not ok:
                raise Infeasible(f"row {name!r} reads 0 {sense} {rhs}")
            continue
        mult = _lcm_den(list(coeffs.values()) + [rhs])
        row = {c: int(a * mult) for c, a in coeffs.items()}
        b = int(rhs * mult)
        if b < 0:
            row = {c: -a for c, a in row.items()}
            b = -b
            sense = {LE: GE, GE: LE, EQ: EQ}[sense]
        if sense == LE:
            names.append(f"s:{name}")
            s = len(names) - 1
            row[s] = 1
            basis.append(s)
        else:
            if sense == GE:
                names.append(f"e:{name}")
                row[len(names) - 1] = -1
            names.append(f"a:{name}")
            a = len(names) - 1
            artificial.add(a)
            row[a] = 1
            basis.append(a)
        if b:
            row[RHS] = b
        rows.append(row)
        scales.append(1)
    tab = _Tableau(rows, scales, basis, len(names))

    if artificial:
        w: dict = {}
        for i, row in enumerate(rows):
            if basis[i] in artificial:
                for k, v in row.items():
                    if k not in artificial:
                        w[k] = w.get(k, 0) - v
        w = {k: v for k, v in w.items() if v}
        obj = [[w, 1]]
        tab.run(obj, lambda col: True)
        if obj[0][0].get(RHS, 0) != 0:
            raise Infeasible("phase one ends with positive artificial mass")
        # drive zero-level artificials out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] in artificial:
                row = tab.rows[i]
                col = min((k for k in row if k != RHS and k not in artificial), default=None)
                if col is None:
                    del tab.rows[i], tab.scales[i], tab.basis[i]
                    continue
                tab.pivot(i, col, obj)
            i += 1
        for row in tab.rows:
            for a in artificial.intersection(row):
                del row[a]

    # phase two objective row, built from the current basis
    c = sf.obj if lp.sense == "min" else {k: -v for k, v in sf.obj.items()}
    d: dict = {k: Fraction(v) for k, v in c.items()}
    for i, col in enumerate(tab.basis):
        cb = c.get(col)
        if not cb:
            continue
        for k, v in tab.rows[i].items():
            if k == col:
                continue
            d[k] = d.get(k, Fraction(0)) - cb * Fraction(v, tab.scales[i])
    for col in tab.basis:
        d.pop(col, None)
    d = {k: v for k, v in d.items() if v}
    mult = _lcm_den(d.values()) if d else 1
    obj = [[{k: int(v * mult) for k, v in d.items()}, mult]]
    tab.run(obj, lambda col: col not in artificial)

    colvals = {tab.basis[i]: tab.value(i) for i in range(len(tab.rows))}
    values = sf.recover({k: v for k, v in colvals.items() if k < nstruct})
    objective = lp.evaluate(values)
    basis_names = frozenset(names[col] for col in tab.basis)
    return BasicSolution(values, objective, basis_names)


def solve_lp(lp: LinearProgram) -> BasicSolution:
    return solve_basic(lp)


__all__ = ["solve_basic", "solve_lp", "Infeasible", "Unbounded", "LPError"]
