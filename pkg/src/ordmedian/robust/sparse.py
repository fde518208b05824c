"""Sparse extended instances (C', m', S0) for the robust and knapsack pipelines.

Oracle-assisted mode replays the two removal loops against a known optimum of
the reduced instance; enumeration mode streams every small configuration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from ..core import Instance, d_set, q


class SparseError(RuntimeError):
    pass


@dataclass(frozen=True)
class SparseInstance:
    clients: tuple  # C', in instance client order
    m_prime: int
    S0: tuple  # in instance facility order
    U: Fraction
    U_prime: Fraction | None = None  # only known when built from an optimum
    rounds: int = 0

    def key(self):
        return (self.clients, self.m_prime, self.S0)


def removal_cap(rho) -> int:
    return math.ceil(2 / q(rho))


def ball(inst: Instance, pool, p, r) -> list:
    return [j for j in pool if inst.d(p, j) <= r]


def smallest_positive_cost(inst: Instance, f) -> Fraction | None:
    vals = [f(inst.d(i, j)) for i in inst.facilities for j in inst.clients]
    vals = [v for v in vals if v > 0]
    return min(vals) if vals else None


def guess_U(inst: Instance, f, eps, V_star) -> Fraction:
    """Smallest point of the grid {u0 (1+eps)^s} that is >= V*; 0 when V* = 0."""
    V_star = q(V_star)
    if V_star == 0:
        return Fraction(0)
    u = smallest_positive_cost(inst, f)
    while u < V_star:
        u *= 1 + q(eps)
    return u


def U_grid(inst: Instance, f, eps) -> list[Fraction]:
    """0 followed by u0 (1+eps)^s up to the first point >= m * f(dmax)."""
    u0 = smallest_positive_cost(inst, f)
    if u0 is None:
        return [Fraction(0)]
    dmax = max(inst.d(i, j) for i in inst.facilities for j in inst.clients)
    top = inst.n_served * f(dmax)
    out = [Fraction(0), u0]
    while out[-1] < top:
        out.append(out[-1] * (1 + q(eps)))
    return out


def build_sparse_instance(inst: Instance, f, U, rho, delta, opt) -> SparseInstance:
    """Heavy stars and dense balls of the optimum ``opt`` go to S0.

    ``opt`` is an optimum of the reduced instance at lambda = 1 (its served set
    is C*).  For knapsack every client is served, so C* = C.
    """
    U, rho, delta = q(U), q(rho), q(delta)
    thr = rho * U
    Fstar = tuple(opt.open)
    Cstar = set(opt.served)
    kappa = {p: opt.kappa(inst, p) for p in inst.facilities + inst.clients}
    cst = {p: opt.c_star(inst, p) for p in inst.facilities + inst.clients}
    cap = removal_cap(rho) + 2
    S0: list = []
    # loop 1: heavy stars, one pass over F*
    for i in Fstar:
        star = sum((f(cst[j]) for j in opt.served if kappa[j] == i), Fraction(0))
        if star >= thr and i not in S0:
            S0.append(i)
    if len(S0) > cap:
        raise SparseError(f"{len(S0)} heavy stars exceed the bound {cap}")
    # loop 2: dense balls around facilities and surviving clients
    Cp = list(inst.clients)
    rounds = 0
    while True:
        hit = None
        for p in list(inst.facilities) + Cp:
            r = delta * cst[p]
            dense = [j for j in Cp if j in Cstar and inst.d(p, j) <= r]
            if len(dense) * f((1 - delta) * cst[p]) >= thr and dense:
                hit = p
                break
        if hit is None:
            break
        r = delta * cst[hit]
        gone = set(ball(inst, Cp, hit, r))
        Cp = [j for j in Cp if j not in gone]
        if kappa[hit] not in S0:
            S0.append(kappa[hit])
        rounds += 1
        if rounds > cap or len(S0) > cap:
            raise SparseError(f"removal loop exceeded {cap} steps")
    order = {i: k for k, i in enumerate(inst.facilities)}
    S0 = tuple(sorted(S0, key=order.__getitem__))
    Cp_star = [j for j in Cp if j in Cstar]
    m_prime = len(Cp_star)
    U_prime = sum((f(cst[j]) for j in Cp_star), Fraction(0))
    return SparseInstance(tuple(Cp), m_prime, S0, U, U_prime, rounds)


def check_sparse_conditions(inst: Instance, sp: SparseInstance, f, rho, delta, opt) -> dict:
    """Replay the three sparsity conditions against ``opt``; returns name -> bool."""
    rho, delta = q(rho), q(delta)
    thr = rho * sp.U
    Cp = set(sp.clients)
    Cstar = set(opt.served)
    Cps = [j for j in opt.served if j in Cp]
    kappa = {p: opt.kappa(inst, p) for p in inst.facilities + inst.clients}
    cst = {p: opt.c_star(inst, p) for p in inst.facilities + inst.clients}
    a1 = all(sum((f(cst[j]) for j in Cps if kappa[j] == i), Fraction(0)) <= thr
             for i in opt.open if i not in sp.S0)
    a2 = all(len([j for j in Cps if inst.d(p, j) <= delta * cst[p]]) * f((1 - delta) * cst[p]) <= thr
             for p in list(inst.facilities) + list(sp.clients))
    removed = sum((f((1 - delta) / (1 + delta) * d_set(inst, j, sp.S0))
                   for j in Cstar - Cp), Fraction(0)) if sp.S0 else (Fraction(0) if Cstar <= Cp else None)
    Up = sum((f(cst[j]) for j in Cps), Fraction(0))
    a3 = removed is not None and removed + Up <= sp.U
    return {"A.1.1": a1, "A.1.2": a2, "A.1.3": a3, "m_prime": sp.m_prime == len(Cps)}


class SparseStream:
    """All (C', m', S0) candidates with up to ceil(2/rho) facilities in S0 and
    C' = C minus up to ceil(2/rho) closed balls; C' != C needs S0 non-empty.
    """

    def __init__(self, inst: Instance, rho, delta, U, cap: int | None = None, full_service: bool = False):
        self.inst = inst
        self.rho = q(rho)
        self.delta = q(delta)
        self.U = q(U)
        self.cap = cap
        self.full_service = full_service
        self.truncated = False
        self.count = 0

    def client_subsets(self) -> list[tuple]:
        inst = self.inst
        L = removal_cap(self.rho)
        radii = sorted({self.delta * t for t in inst.metric.distance_set(positive_only=True)})
        balls = set()
        for p in inst.facilities + inst.clients:
            for r in radii:
                b = frozenset(ball(inst, inst.clients, p, r))
                if b:
                    balls.add(b)
        balls = sorted(balls, key=lambda b: (len(b), sorted(inst.clients.index(j) for j in b)))
        removed = {frozenset()}
        for s in range(1, L + 1):
            for combo in itertools.combinations(balls, s):
                removed.add(frozenset().union(*combo))
        out = []
        for rem in sorted(removed, key=lambda b: (len(b), sorted(inst.clients.index(j) for j in b))):
            out.append(tuple(j for j in inst.clients if j not in rem))
        return out

    def _raw(self):
        inst = self.inst
        m = inst.n_served
        L = removal_cap(self.rho)
        subsets = self.client_subsets()
        for s in range(0, L + 1):
            for S0 in itertools.combinations(inst.facilities, s):
                for Cp in subsets:
                    if len(Cp) < len(inst.clients) and not S0:
                        continue
                    if self.full_service:
                        yield SparseInstance(Cp, len(Cp), S0, self.U)
                        continue
                    lo = max(0, m - (len(inst.clients) - len(Cp)))
                    for mp in range(lo, min(m, len(Cp)) + 1):
                        yield SparseInstance(Cp, mp, S0, self.U)

    def __iter__(self):
        for sp in self._raw():
            if self.cap is not None and self.count >= self.cap:
                self.truncated = True
                return
            self.count += 1
            yield sp


def enumerate_sparse_instances(inst: Instance, rho, delta=Fraction(1, 2), U=Fraction(0), cap=None,
                               full_service: bool = False) -> SparseStream:
    return SparseStream(inst, rho, delta, U, cap, full_service)
