"""Bundle creation: disjoint unit-volume copy sets and a queue of r_j bundles per client."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .split import FractionalFt, replace_copy


class BundleError(RuntimeError):
    pass


@dataclass
class BundleFamily:
    bundles: list  # list of lists of copies
    queues: dict  # client -> list of bundle indices

    def owner(self) -> dict:
        return {c: b for b, U in enumerate(self.bundles) for c in U}


def d_max_set(ft: FractionalFt, j, cs) -> Fraction:
    return max(ft.d(c, j) for c in cs)


def closest_unit(ft: FractionalFt, j, pool: list) -> tuple[list, Fraction | None]:
    """Prefix of ``pool`` (sorted closest first) holding unit volume.

    Returns the copies and, when the last copy overshoots, the amount of it
    that belongs to the unit volume.
    """
    out, vol = [], Fraction(0)
    for c in pool:
        out.append(c)
        vol += ft.y[c]
        if vol >= 1:
            extra = vol - 1
            return out, (ft.y[c] - extra if extra else None)
    raise BundleError(f"less than unit volume left for client {j}")


def create_bundles(ft: FractionalFt) -> BundleFamily:
    """While some queue is short, serve the client whose closest remaining unit
    volume is nearest (ties by client order): reuse the first existing bundle it
    meets, or mint it as a new bundle (cutting a free copy at the unit mark)."""
    inst = ft.inst
    Fp = {j: list(ft.F[j]) for j in inst.clients}
    Q = {j: [] for j in inst.clients}
    bundles: list = []
    owner: dict = {}
    while True:
        best = None
        for j in inst.clients:
            if len(Q[j]) >= ft.r(j):
                continue
            U, _ = closest_unit(ft, j, Fp[j])
            val = d_max_set(ft, j, U)
            if best is None or val < best[0]:
                best = (val, j)
        if best is None:
            break
        j = best[1]
        U, cut = closest_unit(ft, j, Fp[j])
        hit = next((owner[c] for c in U if c in owner), None)
        if hit is not None:
            Q[j].append(hit)
            gone = set(bundles[hit])
            Fp[j] = [c for c in Fp[j] if c not in gone]
            continue
        if cut is not None:
            a, b2 = ft.split_copy(U[-1], cut)
            for jj in inst.clients:
                replace_copy(Fp[jj], U[-1], a, b2)
            U = U[:-1] + [a]
        b = len(bundles)
        bundles.append(U)
        for c in U:
            owner[c] = b
        Q[j].append(b)
        gone = set(U)
        Fp[j] = [c for c in Fp[j] if c not in gone]
    fam = BundleFamily(bundles, Q)
    check_bundles(ft, fam)
    return fam


def check_bundles(ft: FractionalFt, fam: BundleFamily) -> None:
    """Disjoint unit bundles, r_j distinct queue entries, and the 3 d_max^p bound."""
    seen = set()
    for U in fam.bundles:
        if ft.volume(U) != 1:
            raise BundleError("bundle without unit volume")
        if seen & set(U):
            raise BundleError("bundles intersect")
        seen |= set(U)
    for j, Qj in fam.queues.items():
        r = ft.r(j)
        if len(Qj) != r or len(set(Qj)) != r:
            raise BundleError(f"queue of {j} is not r_j distinct bundles")
        for p, b in enumerate(Qj, start=1):
            if d_max_set(ft, j, fam.bundles[b]) > 3 * ft.d_max_p(j, p):
                raise BundleError(f"bundle {p} of {j} is farther than 3 d_max^p")
