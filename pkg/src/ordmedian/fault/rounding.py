"""Auxiliary integral polytope over copies and marginal-preserving sampling."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lp import EQ, GE, LE, LinearProgram, decompose_to_vertices, sample_vertex
from .bundles import BundleFamily
from .laminar import LaminarFamily
from .split import FractionalFt


class AuxError(RuntimeError):
    pass


@dataclass
class AuxPolytope:
    lp: LinearProgram
    zname: dict  # copy -> var
    ft: FractionalFt
    bundles: BundleFamily
    laminar: LaminarFamily
    k: int
    _dec: object = field(default=None, repr=False)

    def point(self) -> dict:
        return {self.zname[c]: self.ft.y[c] for c in self.ft.copies}

    def decomposition(self):
        if self._dec is None:
            self._dec = decompose_to_vertices(self.lp, self.point())
        return self._dec


@dataclass
class SampledSolution:
    z: dict  # copy -> 0/1
    opened: tuple  # locations, in instance order


def build_aux_polytope(ft: FractionalFt, bundles: BundleFamily, laminar: LaminarFamily, k: int) -> AuxPolytope:
    """z(U) = 1 per bundle, r_j - 1 <= z(B'_j) <= r_j, at most one copy per
    location, z(F) = k, 0 <= z <= 1.  y must satisfy all of it."""
    lp = LinearProgram("aux")
    fidx = ft.fidx
    zname = {c: lp.add_var(f"z{fidx[c[0]]}_{c[1]}", 0, 1) for c in ft.copies}
    for b, U in enumerate(bundles.bundles):
        lp.add_constraint({zname[c]: 1 for c in U}, EQ, 1, f"bundle{b}")
    cidx = {j: n for n, j in enumerate(ft.inst.clients)}
    for j, S in laminar.B_prime.items():
        row = {zname[c]: 1 for c in S}
        r = ft.r(j)
        lp.add_constraint(row, GE, r - 1, f"ball_lo{cidx[j]}")
        lp.add_constraint(row, LE, r, f"ball_hi{cidx[j]}")
    for i in ft.inst.facilities:
        cs = ft.copies_of(i)
        if cs:
            lp.add_constraint({zname[c]: 1 for c in cs}, LE, 1, f"loc{fidx[i]}")
    lp.add_constraint({zname[c]: 1 for c in ft.copies}, EQ, k, "total")
    lp.set_objective({})
    aux = AuxPolytope(lp, zname, ft, bundles, laminar, k)
    bad = lp.violations(aux.point())
    if bad:
        raise AuxError("fractional opening is not in the auxiliary polytope: " + "; ".join(bad[:3]))
    return aux


def check_sample(aux: AuxPolytope, z: dict) -> None:
    ft = aux.ft
    for U in aux.bundles.bundles:
        if sum(z[c] for c in U) != 1:
            raise AuxError("a bundle does not have exactly one open copy")
    for j, S in aux.laminar.B_prime.items():
        if sum(z[c] for c in S) not in (ft.r(j) - 1, ft.r(j)):
            raise AuxError(f"merged ball of {j} has the wrong number of opens")
    if sum(z.values()) != aux.k:
        raise AuxError("sample does not open k copies")
    for i in ft.inst.facilities:
        if sum(z[c] for c in ft.copies_of(i)) > 1:
            raise AuxError(f"two copies of {i} opened")


def stochastic_round(ft: FractionalFt, bundles: BundleFamily, laminar: LaminarFamily, k: int, rng,
                     aux: AuxPolytope | None = None) -> SampledSolution:
    """Draw z' from a vertex decomposition of y, so E[z'] = y exactly."""
    aux = aux or build_aux_polytope(ft, bundles, laminar, k)
    vert = sample_vertex(aux.decomposition(), rng)
    z = {c: int(vert[aux.zname[c]]) for c in ft.copies}
    check_sample(aux, z)
    opened = tuple(i for i in ft.inst.facilities if any(z[c] for c in ft.copies_of(i)))
    return SampledSolution(z, opened)
