"""Instances, exact metrics, ordered costs and solution evaluation.

Every number that flows through the solvers is a :class:`fractions.Fraction`;
helpers here accept ints, Fractions, ``"p/q"`` strings and decimal strings.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class InstanceError(ValueError):
    """Malformed instance, weight vector or solution."""


class MetricViolation(InstanceError):
    def __init__(self, message: str, points: tuple = ()):
        super().__init__(message)
        self.points = points


class InfeasibleSolution(InstanceError):
    pass


def q(value) -> Fraction:
    """Parse a rational exactly (int, Fraction, "3/10" or "0.25")."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a string or Fraction")
    raise TypeError(f"cannot read {value!r} as a rational")


def fmt(x: Fraction) -> str | int:
    """JSON form of a rational: int when integral, else "p/q"."""
    x = Fraction(x)
    if x.denominator == 1:
        return x.numerator
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# metric


@dataclass(frozen=True)
class MetricSpace:
    facility_ids: tuple
    client_ids: tuple
    points: tuple  # all ids, facilities first then clients not already listed
    _index: dict = field(repr=False, compare=False)
    _dist: tuple = field(repr=False, compare=False)

    @classmethod
    def from_matrix(cls, facility_ids, client_ids, matrix, points=None) -> "MetricSpace":
        facility_ids = tuple(facility_ids)
        client_ids = tuple(client_ids)
        if points is None:
            points = tuple(dict.fromkeys(facility_ids + client_ids))
        points = tuple(points)
        if len(matrix) != len(points) or any(len(row) != len(points) for row in matrix):
            raise InstanceError(
                f"distance matrix must be {len(points)}x{len(points)} (one row per point)")
        dist = tuple(tuple(q(v) for v in row) for row in matrix)
        index = {p: k for k, p in enumerate(points)}
        missing = [p for p in facility_ids + client_ids if p not in index]
        if missing:
            raise InstanceError(f"ids without a matrix row: {missing}")
        return cls(facility_ids, client_ids, points, index, dist)

    @classmethod
    def from_points_l1(cls, facility_ids, client_ids, coords) -> "MetricSpace":
        """``coords`` lists one 2-D rational point per entry of facilities+clients."""
        facility_ids = tuple(facility_ids)
        client_ids = tuple(client_ids)
        points = tuple(dict.fromkeys(facility_ids + client_ids))
        if len(coords) != len(points):
            raise InstanceError(f"expected {len(points)} coordinates, got {len(coords)}")
        xy = [(q(a), q(b)) for a, b in coords]
        matrix = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in xy] for a in xy]
        return cls.from_matrix(facility_ids, client_ids, matrix, points)

    def d(self, u, v) -> Fraction:
        return self._dist[self._index[u]][self._index[v]]

    @property
    def matrix(self) -> tuple:
        return self._dist

    def distance_set(self, positive_only: bool = False) -> list[Fraction]:
        """Sorted distinct facility-client distances."""
        vals = {self.d(i, j) for i in self.facility_ids for j in self.client_ids}
        if positive_only:
            vals.discard(Fraction(0))
        return sorted(vals)


def validate_metric(m: MetricSpace, separation: bool = False) -> None:
    """Raise :class:`MetricViolation` naming the first offending entry.

    With ``separation`` every pair of non-co-located points must be at
    distance at least 1.
    """
    pts = m.points
    D = m.matrix
    n = len(pts)
    for a in range(n):
        if D[a][a] != 0:
            raise MetricViolation(f"dist({pts[a]},{pts[a]}) = {D[a][a]} != 0", (pts[a],))
        for b in range(n):
            if D[a][b] < 0:
                raise MetricViolation(f"negative distance dist({pts[a]},{pts[b]})", (pts[a], pts[b]))
            if D[a][b] != D[b][a]:
                raise MetricViolation(
                    f"asymmetric: dist({pts[a]},{pts[b]})={D[a][b]} but dist({pts[b]},{pts[a]})={D[b][a]}",
                    (pts[a], pts[b]))
    for a in range(n):
        for c in range(n):
            for b in range(n):
                if D[a][c] > D[a][b] + D[b][c]:
                    raise MetricViolation(
                        f"triangle violation: dist({pts[a]},{pts[c]})={D[a][c]} > "
                        f"dist({pts[a]},{pts[b]})+dist({pts[b]},{pts[c]})={D[a][b] + D[b][c]}",
                        (pts[a], pts[c], pts[b]))
    if separation:
        for a in range(n):
            for b in range(a + 1, n):
                if 0 < D[a][b] < 1:
                    raise MetricViolation(
                        f"non-co-located points {pts[a]},{pts[b]} at distance {D[a][b]} < 1",
                        (pts[a], pts[b]))


# ---------------------------------------------------------------------------
# weights and ordered costs


def check_weights(w: Sequence[Fraction]) -> None:
    for a, b in zip(w, w[1:]):
        if b > a:
            raise InstanceError("weight vector must be non-increasing")
    if w and w[-1] < 0:
        raise InstanceError("weight vector must be non-negative")


def sorted_desc(c: Iterable[Fraction]) -> list[Fraction]:
    return sorted(c, reverse=True)


def ordered_cost(w: Sequence[Fraction], c: Sequence[Fraction]) -> Fraction:
    if len(w) != len(c):
        raise ValueError(f"length mismatch: |w|={len(w)}, |c|={len(c)}")
    return sum((a * b for a, b in zip(w, sorted_desc(c))), Fraction(0))


def top_ell(c: Sequence[Fraction], ell: int) -> Fraction:
    if not 1 <= ell <= len(c):
        raise ValueError(f"ell={ell} outside [1, {len(c)}]")
    return sum(sorted_desc(c)[:ell], Fraction(0))


def conic_cost(w: Sequence[Fraction], c: Sequence[Fraction]) -> Fraction:
    """Ordered cost written as a conic combination of Top-l values."""
    if len(w) != len(c):
        raise ValueError(f"length mismatch: |w|={len(w)}, |c|={len(c)}")
    cs = sorted_desc(c)
    total = Fraction(0)
    prefix = Fraction(0)
    n = len(w)
    for ell in range(1, n + 1):
        prefix += cs[ell - 1]
        nxt = w[ell] if ell < n else Fraction(0)
        total += (w[ell - 1] - nxt) * prefix
    return total


def pad_weights(w: Sequence[Fraction], eps: Fraction) -> list[Fraction]:
    """Raise small weights to the floor ``eps * w_1 / m``."""
    eps = q(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not w:
        return []
    floor = eps * w[0] / len(w)
    return [max(wi, floor) for wi in w]


def pos_set(n: int, delta: Fraction) -> list[int]:
    """Sorted anchors ``min(ceil((1+delta)^s), n)`` for s >= 0."""
    delta = q(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    out = []
    power = Fraction(1)
    while True:
        v = min(math.ceil(power), n)
        if not out or out[-1] != v:
            out.append(v)
        if v >= n:
            return out
        power *= 1 + delta


def next_pos(pos: Sequence[int], ell: int, n: int) -> int:
    for p in pos:
        if p > ell:
            return p
    return n + 1


def sparsify_weights(w: Sequence[Fraction], delta: Fraction) -> tuple[list[int], list[Fraction]]:
    """Return (POS, w~): weights kept on POS and copied from the next anchor elsewhere."""
    n = len(w)
    pos = pos_set(n, delta)
    ext = list(w) + [Fraction(0)]
    wt = [Fraction(0)] * n
    for idx, ell in enumerate(pos):
        nxt = next_pos(pos, ell, n)
        wt[ell - 1] = ext[ell - 1]
        for i in range(ell + 1, min(nxt, n + 1)):
            wt[i - 1] = ext[nxt - 1]
    return pos, wt


def pos_conic_cost(pos: Sequence[int], wt: Sequence[Fraction], c: Sequence[Fraction]) -> Fraction:
    """Sum over l in POS of (w~_l - w~_next(l)) * Top_l(c)."""
    n = len(wt)
    ext = list(wt) + [Fraction(0)]
    return sum(((ext[ell - 1] - ext[next_pos(pos, ell, n) - 1]) * top_ell(c, ell) for ell in pos),
               Fraction(0))


def truncated_distance(d: Fraction, T: Fraction) -> Fraction:
    return d if d >= T else Fraction(0)


# ---------------------------------------------------------------------------
# matroids


@dataclass(frozen=True)
class PartitionMatroid:
    parts: tuple  # tuple of tuples of facility ids
    capacities: tuple

    def is_independent(self, subset) -> bool:
        s = set(subset)
        return all(len(s.intersection(p)) <= c for p, c in zip(self.parts, self.capacities))

    def rank(self, subset) -> int:
        s = set(subset)
        return sum(min(len(s.intersection(p)), c) for p, c in zip(self.parts, self.capacities))


@dataclass(frozen=True)
class ExplicitMatroid:
    independent: frozenset  # frozenset of frozensets

    def is_independent(self, subset) -> bool:
        return frozenset(subset) in self.independent

    def rank(self, subset) -> int:
        s = frozenset(subset)
        return max(len(I) for I in self.independent if I <= s)


def make_partition_matroid(facilities, parts, capacities) -> PartitionMatroid:
    parts = tuple(tuple(p) for p in parts)
    capacities = tuple(int(c) for c in capacities)
    if len(parts) != len(capacities):
        raise InstanceError("one capacity per part is required")
    seen: list = []
    for p in parts:
        seen.extend(p)
    if len(seen) != len(set(seen)):
        raise InstanceError("partition parts must be disjoint")
    if set(seen) != set(facilities):
        raise InstanceError("partition parts must cover every facility")
    if any(c < 0 for c in capacities):
        raise InstanceError("capacities must be non-negative")
    return PartitionMatroid(parts, capacities)


def make_explicit_matroid(facilities, independent_sets) -> ExplicitMatroid:
    fam = {frozenset(s) for s in independent_sets}
    fam.add(frozenset())
    universe = set(facilities)
    for s in fam:
        if not s <= universe:
            raise InstanceError(f"independent set {sorted(s, key=str)} uses unknown facilities")
    for s in fam:
        for e in s:
            if s - {e} not in fam:
                raise InstanceError("independent-set table is not downward closed")
    for a in fam:
        for b in fam:
            if len(a) < len(b) and not any(a | {e} in fam for e in b - a):
                raise InstanceError("independent-set table violates the exchange property")
    return ExplicitMatroid(frozenset(fam))


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Robust:
    k: int
    m: int


@dataclass(frozen=True)
class MatroidVariant:
    matroid: PartitionMatroid | ExplicitMatroid


@dataclass(frozen=True)
class Knapsack:
    wt: dict  # facility id -> Fraction
    W: Fraction


@dataclass(frozen=True)
class FaultTolerant:
    k: int
    r: dict  # client id -> int


@dataclass(frozen=True)
class Instance:
    metric: MetricSpace
    w: tuple
    variant: Robust | MatroidVariant | Knapsack | FaultTolerant
    name: str = ""

    def __post_init__(self):
        w = tuple(q(x) for x in self.w)
        object.__setattr__(self, "w", w)
        check_weights(w)
        F, C = self.facilities, self.clients
        v = self.variant
        if not F or not C:
            raise InstanceError("need at least one facility and one client")
        if isinstance(v, Robust):
            if not 1 <= v.k <= len(F):
                raise InstanceError(f"robust k={v.k} outside [1, |F|={len(F)}]")
            if not 1 <= v.m <= len(C):
                raise InstanceError(f"robust m={v.m} outside [1, |C|={len(C)}]")
            if len(w) != v.m:
                raise InstanceError(f"|w|={len(w)} must equal m={v.m}")
        else:
            if len(w) != len(C):
                raise InstanceError(f"|w|={len(w)} must equal |C|={len(C)}")
        if isinstance(v, FaultTolerant):
            if not 1 <= v.k <= len(F):
                raise InstanceError(f"k={v.k} outside [1, |F|={len(F)}]")
            if set(v.r) != set(C):
                raise InstanceError("fault-tolerant requirements must list every client")
            for j, rj in v.r.items():
                if not 1 <= rj <= v.k:
                    raise InstanceError(f"requirement r[{j}]={rj} outside [1, k={v.k}]")
        if isinstance(v, Knapsack):
            if set(v.wt) != set(F):
                raise InstanceError("knapsack weights must list every facility")
            if any(x < 0 for x in v.wt.values()):
                raise InstanceError("knapsack weights must be non-negative")
            if not any(v.wt[i] <= v.W for i in F):
                raise InstanceError("no non-empty facility set fits the knapsack budget")

    @property
    def facilities(self) -> tuple:
        return self.metric.facility_ids

    @property
    def clients(self) -> tuple:
        return self.metric.client_ids

    def d(self, u, v) -> Fraction:
        return self.metric.d(u, v)

    @property
    def n_served(self) -> int:
        return self.variant.m if isinstance(self.variant, Robust) else len(self.clients)

    def is_feasible_open(self, opened) -> bool:
        s = set(opened)
        if not s or not s <= set(self.facilities):
            return False
        v = self.variant
        if isinstance(v, (Robust, FaultTolerant)):
            return len(s) <= v.k
        if isinstance(v, MatroidVariant):
            return v.matroid.is_independent(s)
        return sum((v.wt[i] for i in s), Fraction(0)) <= v.W


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True)
class Solution:
    open: tuple
    served: tuple | None = None
    assignments: dict | None = None


def d_set(inst: Instance, j, opened) -> Fraction:
    return min(inst.d(i, j) for i in opened)


def nearest_facilities(inst: Instance, j, opened, r: int) -> list:
    """The r closest members of ``opened`` (ties by facility order)."""
    order = {i: k for k, i in enumerate(inst.facilities)}
    return sorted(opened, key=lambda i: (inst.d(i, j), order[i]))[:r]


def service_cost(inst: Instance, j, opened) -> Fraction:
    v = inst.variant
    if isinstance(v, FaultTolerant):
        return sum((inst.d(i, j) for i in nearest_facilities(inst, j, opened, v.r[j])), Fraction(0))
    return d_set(inst, j, opened)


def best_served(inst: Instance, opened, m: int) -> list:
    """The m clients closest to ``opened``; optimal for non-increasing w >= 0."""
    order = {j: k for k, j in enumerate(inst.clients)}
    return sorted(inst.clients, key=lambda j: (d_set(inst, j, opened), order[j]))[:m]


def evaluate_solution(inst: Instance, sol: Solution) -> tuple[list[Fraction], Fraction]:
    """Per-client service costs (in served order) and the ordered objective.

    Assignments are recomputed from the open set; a robust solution without a
    served set serves the m closest clients.
    """
    opened = tuple(dict.fromkeys(sol.open))
    if len(opened) != len(sol.open):
        raise InfeasibleSolution("open facilities listed twice")
    if not inst.is_feasible_open(opened):
        raise InfeasibleSolution(f"open set {list(opened)} infeasible for {type(inst.variant).__name__}")
    v = inst.variant
    if isinstance(v, FaultTolerant) and len(opened) < max(v.r.values()):
        raise InfeasibleSolution("fewer open facilities than the largest requirement")
    if isinstance(v, Robust):
        served = list(sol.served) if sol.served is not None else best_served(inst, opened, v.m)
        if len(served) != v.m or len(set(served)) != v.m or not set(served) <= set(inst.clients):
            raise InfeasibleSolution(f"robust solution must serve exactly m={v.m} distinct clients")
    else:
        served = list(inst.clients)
        if sol.served is not None and set(sol.served) != set(served):
            raise InfeasibleSolution("every client must be served")
    costs = [service_cost(inst, j, opened) for j in served]
    return costs, ordered_cost(inst.w, costs)


def assignment_of(inst: Instance, opened, served) -> dict:
    v = inst.variant
    r = v.r if isinstance(v, FaultTolerant) else {}
    return {j: nearest_facilities(inst, j, opened, r.get(j, 1)) for j in served}


def complete(inst: Instance, opened, served=None) -> Solution:
    opened = tuple(i for i in inst.facilities if i in set(opened))
    if served is None:
        served = best_served(inst, opened, inst.variant.m) if isinstance(inst.variant, Robust) \
            else list(inst.clients)
    order = {j: k for k, j in enumerate(inst.clients)}
    served = tuple(sorted(served, key=order.__getitem__))
    return Solution(opened, served, assignment_of(inst, opened, served))


def feasible_open_sets(inst: Instance, budget: int | None = None) -> Iterable[tuple]:
    """Every feasible non-empty open set (robust/FT: all sizes up to k)."""
    F = inst.facilities
    v = inst.variant
    if isinstance(v, (Robust, FaultTolerant)):
        sizes = range(1, v.k + 1)
    else:
        sizes = range(1, len(F) + 1)
    count = 0
    for s in sizes:
        for combo in itertools.combinations(F, s):
            if inst.is_feasible_open(combo):
                count += 1
                yield combo
