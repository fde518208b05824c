"""Facility splitting: copies so that every client uses a copy fully or not at all.

Each copy of location i is a sub-interval [lo, hi) of i's opening [0, y_i).
Client j takes a prefix [0, a_ij) of every location it uses, so cutting each
interval at all prefix ends (and at the offsets where j's unit volumes end)
gives x_cj in {0, y_c} for every copy c at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..core import FaultTolerant, Instance, InstanceError, q


class SplitError(ValueError):
    pass


@dataclass
class FractionalFt:
    inst: Instance
    copies: list  # (location, idx)
    y: dict  # copy -> volume
    span: dict  # copy -> (lo, hi) inside the location's interval
    F: dict  # client -> copies of F_j, closest first
    parts: dict  # client -> [F_{j,1}, ..., F_{j,r_j}]
    x_orig: dict = field(default_factory=dict)  # (i, j) -> nearest-volume assignment
    _next: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fidx = {i: a for a, i in enumerate(self.inst.facilities)}

    def r(self, j) -> int:
        return self.inst.variant.r[j]

    def d(self, c, j) -> Fraction:
        return self.inst.d(c[0], j)

    def key(self, j):
        fidx = self.fidx
        return lambda c: (self.d(c, j), fidx[c[0]], self.span[c][0])

    def volume(self, cs) -> Fraction:
        return sum((self.y[c] for c in cs), Fraction(0))

    def copies_of(self, i) -> list:
        return [c for c in self.copies if c[0] == i]

    # distance statistics -------------------------------------------------
    def d_av_p(self, j, p: int) -> Fraction:
        return sum((self.y[c] * self.d(c, j) for c in self.parts[j][p - 1]), Fraction(0))

    def d_max_p(self, j, p: int) -> Fraction:
        return max(self.d(c, j) for c in self.parts[j][p - 1])

    def d_min_p(self, j, p: int) -> Fraction:
        return min(self.d(c, j) for c in self.parts[j][p - 1])

    def d_av(self, j) -> Fraction:
        return sum((self.y[c] * self.d(c, j) for c in self.F[j]), Fraction(0)) / self.r(j)

    def d_max(self, j) -> Fraction:
        """d_max^{r_j}(j)."""
        return self.d_max_p(j, self.r(j))

    def ball(self, j, R) -> list:
        return [c for c in self.copies if self.d(c, j) <= R]

    def lp_cost(self, j) -> Fraction:
        return self.r(j) * self.d_av(j)

    # structural changes ----------------------------------------------------
    def split_copy(self, c, amount) -> tuple:
        """Cut copy ``c`` after ``amount`` volume; both pieces replace it everywhere."""
        if not 0 < amount < self.y[c]:
            raise SplitError(f"cannot cut {c} at {amount}")
        lo, hi = self.span[c]
        i = c[0]
        a = (i, self._next[i])
        b = (i, self._next[i] + 1)
        self._next[i] += 2
        self.span[a], self.span[b] = (lo, lo + amount), (lo + amount, hi)
        self.y[a], self.y[b] = amount, hi - lo - amount
        del self.span[c], self.y[c]

        replace_copy(self.copies, c, a, b)
        for j in self.F:
            replace_copy(self.F[j], c, a, b)
            for part in self.parts[j]:
                replace_copy(part, c, a, b)
        return a, b

    def check(self) -> None:
        """Volumes, partitions and the x in {0, y} structure."""
        inst = self.inst
        for j in inst.clients:
            r = self.r(j)
            if self.volume(self.F[j]) != r:
                raise SplitError(f"y(F_j) != r_j for {j}")
            if len(self.parts[j]) != r or any(self.volume(P) != 1 for P in self.parts[j]):
                raise SplitError(f"unit partition broken for {j}")
            if [c for P in self.parts[j] for c in P] != self.F[j]:
                raise SplitError(f"partition of {j} is not F_j in order")
            for p in range(1, r):
                if self.d_max_p(j, p) > self.d_min_p(j, p + 1):
                    raise SplitError(f"unit volumes of {j} out of order")
            if r * self.d_av(j) != sum((self.d_av_p(j, p) for p in range(1, r + 1)), Fraction(0)):
                raise SplitError("d_av identity failed")
        for i in inst.facilities:
            cs = sorted(self.copies_of(i), key=lambda c: self.span[c][0])
            ends = Fraction(0)
            for c in cs:
                lo, hi = self.span[c]
                if lo != ends or hi - lo != self.y[c] or self.y[c] <= 0:
                    raise SplitError(f"copies of {i} do not tile its interval")
                ends = hi
        return None


def replace_copy(seq: list, c, a, b) -> None:
    """Put the pieces a, b in place of c (in that order) if c is present."""
    if c in seq:
        k = seq.index(c)
        seq[k:k + 1] = [a, b]


def nearest_volume(inst: Instance, y: dict, j) -> dict:
    """Greedy nearest r_j volume for client j: location -> amount taken."""
    r = inst.variant.r[j]
    fidx = {i: a for a, i in enumerate(inst.facilities)}
    need = Fraction(r)
    out = {}
    for i in sorted(inst.facilities, key=lambda i: (inst.d(i, j), fidx[i])):
        if need == 0:
            break
        a = min(q(y.get(i, 0)), need)
        if a > 0:
            out[i] = a
            need -= a
    if need > 0:
        raise SplitError(f"total opening is short of r_j={r} for {j}")
    return out


def split_facilities(x: dict, y: dict, inst: Instance) -> FractionalFt:
    """Copies with x_cj in {0, y_c}; F_j is j's nearest r_j volume, cut into unit parts.

    The given x only serves as a feasibility certificate: every client is
    reassigned to its nearest r_j volume, which never raises a connection cost.
    """
    v = inst.variant
    if not isinstance(v, FaultTolerant):
        raise InstanceError("splitting needs a fault-tolerant instance")
    y = {i: q(y.get(i, 0)) for i in inst.facilities}
    if sum(y.values()) < max(v.r.values()):
        raise SplitError("total opening below the largest requirement")
    for (i, j), a in x.items():
        if q(a) > y[i]:
            raise SplitError(f"x exceeds y at {(i, j)}")
    for j in inst.clients:
        if sum((q(x.get((i, j), 0)) for i in inst.facilities), Fraction(0)) != v.r[j]:
            raise SplitError(f"x does not meet the demand of {j}")
    take = {j: nearest_volume(inst, y, j) for j in inst.clients}
    cuts = {i: {Fraction(0), y[i]} for i in inst.facilities if y[i] > 0}
    for j in inst.clients:
        s = Fraction(0)
        for i, a in take[j].items():
            cuts[i].add(a)
            p = s.__floor__() + 1
            while p < s + a:
                cuts[i].add(p - s)
                p += 1
            s += a
    ft = FractionalFt(inst, [], {}, {}, {}, {})
    for i in inst.facilities:
        if y[i] == 0:
            continue
        pts = sorted(cuts[i])
        for idx, (lo, hi) in enumerate(zip(pts, pts[1:])):
            c = (i, idx)
            ft.copies.append(c)
            ft.y[c], ft.span[c] = hi - lo, (lo, hi)
        ft._next[i] = len(pts) - 1
    for j in inst.clients:
        mine = [c for c in ft.copies if c[0] in take[j] and ft.span[c][1] <= take[j][c[0]]]
        mine.sort(key=ft.key(j))
        ft.F[j] = mine
        parts, cur, vol = [], [], Fraction(0)
        for c in mine:
            cur.append(c)
            vol += ft.y[c]
            if vol == 1:
                parts.append(cur)
                cur, vol = [], Fraction(0)
            elif vol > 1:
                raise SplitError("unit boundary fell inside a copy")
        ft.parts[j] = parts
        for i, a in take[j].items():
            ft.x_orig[(i, j)] = a
    ft.check()
    return ft
