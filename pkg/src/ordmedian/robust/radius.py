"""Per-client connection-distance upper bounds."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..core import Instance, q


@dataclass(frozen=True)
class RadiusBounds:
    R_hat: dict  # client -> R-hat_j
    R: dict  # client -> R_j used by the LP


def _density(inst, Cp, R_hat, p, t, delta) -> int:
    r = delta * t / 4
    return sum(1 for j in Cp if R_hat[j] >= t and inst.d(p, j) <= r)


def _ok_at(inst, Cp, R_hat, t, f, rho, U, delta) -> bool:
    lim = rho * U
    fv = f((1 - delta) * (1 - delta / 4) * t)
    return all(_density(inst, Cp, R_hat, p, t, delta) * fv <= lim
               for p in inst.facilities + tuple(Cp))


def compute_radius_bounds(inst: Instance, sparse, f, rho, delta) -> RadiusBounds:
    """Greedy assignment of the largest distances that keeps the density property.

    Distances are tried in non-increasing order; within one distance the
    unassigned clients are tried in instance order.
    """
    rho, delta, U = q(rho), q(delta), sparse.U
    Cp = list(sparse.clients)
    R_hat = {j: Fraction(0) for j in Cp}
    dists = sorted({inst.d(i, j) for i in inst.facilities for j in Cp} - {Fraction(0)}, reverse=True)
    assigned = set()
    for t in dists:
        for j in Cp:
            if j in assigned:
                continue
            R_hat[j] = t
            if _ok_at(inst, Cp, R_hat, t, f, rho, U, delta):
                assigned.add(j)
            else:
                R_hat[j] = Fraction(0)
    R = {j: (1 + 3 * delta / 4) * R_hat[j] for j in Cp}
    return RadiusBounds(R_hat, R)


def check_density_property(inst: Instance, sparse, bounds: RadiusBounds, f, rho, delta) -> bool:
    """The density bound at every t where the left side can change, for every p."""
    rho, delta = q(rho), q(delta)
    Cp = list(sparse.clients)
    ts = set(inst.metric.distance_set(positive_only=True))
    ts |= {v for v in bounds.R_hat.values() if v > 0}
    ts |= {4 * inst.d(p, j) / delta for p in inst.facilities + tuple(Cp) for j in Cp if inst.d(p, j) > 0}
    return all(_ok_at(inst, Cp, bounds.R_hat, t, f, rho, sparse.U, delta) for t in sorted(ts))


def knapsack_radius_bounds(inst: Instance, sparse, f, rho, delta) -> RadiusBounds:
    """R_j = sup{R > 0 : |Ball(C', j, delta R)| f((1-delta) R) <= rho U}.

    The left side is non-decreasing in R, so the feasible R form an interval
    starting at 0; the supremum is found segment by segment between the
    points where the ball gains clients.
    """
    rho, delta = q(rho), q(delta)
    lim = rho * sparse.U
    Cp = list(sparse.clients)
    R = {}
    for j in Cp:
        marks = sorted({inst.d(j, jj) / delta for jj in Cp})
        # marks[0] == 0 (j itself); count on [marks[k], marks[k+1]) is constant
        best = Fraction(0)
        for k, b in enumerate(marks):
            cnt = sum(1 for jj in Cp if inst.d(j, jj) <= delta * b)
            if f((1 - delta) * b) * cnt > lim:
                best = b
                break
            x = f.inverse_le(lim / cnt) / (1 - delta)
            nxt = marks[k + 1] if k + 1 < len(marks) else None
            if nxt is None or x < nxt:
                best = x
                break
        R[j] = best
    return RadiusBounds(dict(R), R)
