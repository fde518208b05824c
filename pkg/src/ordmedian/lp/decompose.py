"""Write a point of an integral polytope as a convex combination of vertices,
then sample from that combination without bias.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import EQ, GE, LE, LinearProgram, LPError
from .simplex import solve_basic


@dataclass
class VertexDecomposition:
    terms: list  # (weight, vertex dict)

    def total_weight(self) -> Fraction:
        return sum((w for w, _ in self.terms), Fraction(0))

    def mean(self) -> dict:
        out: dict = {}
        for w, z in self.terms:
            for v, x in z.items():
                out[v] = out.get(v, Fraction(0)) + w * x
        return out


def _rows(lp: LinearProgram):
    """Every inequality of the polytope as (coeffs, rhs) meaning coeffs.x <= rhs,
    plus the equalities separately."""
    ineq, eq = [], []
    for c in lp.constraints:
        if c.sense == LE:
            ineq.append((c.coeffs, c.rhs))
        elif c.sense == GE:
            ineq.append(({v: -a for v, a in c.coeffs.items()}, -c.rhs))
        else:
            eq.append((c.coeffs, c.rhs))
    for v in lp.vars:
        if lp.lo[v] is not None:
            ineq.append(({v: Fraction(-1)}, -lp.lo[v]))
        if lp.hi[v] is not None:
            ineq.append(({v: Fraction(1)}, lp.hi[v]))
    return ineq, eq


def _dot(coeffs, point) -> Fraction:
    return sum((a * point.get(v, 0) for v, a in coeffs.items()), Fraction(0))


def decompose_to_vertices(lp: LinearProgram, point: dict, max_terms: int | None = None) -> VertexDecomposition:
    """Caratheodory-style peeling over the minimal face containing ``point``."""
    point = {v: Fraction(point.get(v, 0)) for v in lp.vars}
    bad = lp.violations(point)
    if bad:
        raise LPError("point is not in the polytope: " + "; ".join(bad[:3]))
    ineq, eq = _rows(lp)
    order = {v: k for k, v in enumerate(lp.vars)}
    limit = max_terms if max_terms is not None else len(lp.vars) + 2
    terms = []
    remaining = Fraction(1)
    while True:
        face = LinearProgram(lp.name + ":face")
        for v in lp.vars:
            face.add_var(v, lo=None, hi=None)
        for coeffs, rhs in eq:
            face.add_constraint(coeffs, EQ, rhs)
        for coeffs, rhs in ineq:
            sense = EQ if _dot(coeffs, point) == rhs else LE
            face.add_constraint(coeffs, sense, rhs)
        face.set_objective({v: order[v] + 1 for v in lp.vars})
        z = solve_basic(face).values
        if any(x.denominator != 1 for x in z.values()):
            raise LPError(f"non-integral vertex {z}: polytope is not integral")
        if not lp.is_feasible(z):
            raise LPError("face vertex left the polytope")
        if all(z[v] == point[v] for v in lp.vars):
            terms.append((remaining, z))
            break
        mu = Fraction(1)
        for coeffs, rhs in ineq:
            sp = rhs - _dot(coeffs, point)
            if sp == 0:
                continue
            sz = rhs - _dot(coeffs, z)
            if sz > 0:
                mu = min(mu, sp / sz)
        if not 0 < mu < 1:
            raise LPError(f"degenerate peeling step mu={mu}")
        terms.append((remaining * mu, z))
        point = {v: (point[v] - mu * z[v]) / (1 - mu) for v in lp.vars}
        remaining *= 1 - mu
        if len(terms) > limit:
            raise LPError("decomposition did not shrink the face")
    return VertexDecomposition(terms)


def sample_vertex(dec: VertexDecomposition, rng) -> dict:
    """Draw term i with probability exactly weight_i (``rng`` is a random.Random)."""
    L = 1
    for w, _ in dec.terms:
        L = L * w.denominator // math.gcd(L, w.denominator)
    r = rng.randrange(L)
    acc = 0
    for w, z in dec.terms:
        acc += w.numerator * (L // w.denominator)
        if r < acc:
            return z
    return dec.terms[-1][1]
