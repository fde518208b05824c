"""Dangerous clients, the conflict filter, and the merged laminar balls."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .split import FractionalFt

DANGER = 45
CONFLICT = 6
BALL_DIV = 15
BALL_CAP_DIV = 10


class LaminarError(RuntimeError):
    pass


@dataclass
class LaminarFamily:
    D: list
    D_prime: list
    B: dict  # j -> copies within d_max(j)/15
    B_prime: dict  # j -> merged ball


def is_dangerous(ft: FractionalFt, j) -> bool:
    r = ft.r(j)
    return ft.d_max_p(j, r) > DANGER * ft.d_av_p(j, r)


def in_conflict(ft: FractionalFt, j, jj) -> bool:
    r = ft.r(j)
    if r != ft.r(jj):
        return False
    return ft.inst.d(j, jj) <= CONFLICT * max(ft.d_av_p(j, r), ft.d_av_p(jj, r))


def filter_dangerous(ft: FractionalFt) -> tuple[list, list]:
    inst = ft.inst
    D = [j for j in inst.clients if is_dangerous(ft, j)]
    cidx = {j: b for b, j in enumerate(inst.clients)}
    order = sorted(D, key=lambda j: (-ft.d_av(j), cidx[j]))
    marked: set = set()
    Dp = []
    for j in order:
        if j in marked:
            continue
        Dp.append(j)
        marked.add(j)
        for jj in D:
            if jj not in marked and in_conflict(ft, j, jj):
                marked.add(jj)
    for a in range(len(Dp)):
        for b in range(a + 1, len(Dp)):
            if in_conflict(ft, Dp[a], Dp[b]):
                raise LaminarError(f"{Dp[a]} and {Dp[b]} both kept despite a conflict")
    Dp.sort(key=cidx.__getitem__)
    return D, Dp


def is_laminar(sets) -> bool:
    sets = [frozenset(s) for s in sets]
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            A, B = sets[a], sets[b]
            if A & B and not (A <= B or B <= A):
                return False
    return True


def build_laminar(Dp: list, ft: FractionalFt, D: list | None = None) -> LaminarFamily:
    """Merge each ball with the earlier merged balls of strictly smaller r that it meets."""
    inst = ft.inst
    cidx = {j: b for b, j in enumerate(inst.clients)}
    B = {j: ft.ball(j, ft.d_max(j) / BALL_DIV) for j in Dp}
    Bp: dict = {}
    for j in sorted(Dp, key=lambda j: (ft.r(j), cidx[j])):
        merged = set(B[j])
        for jj, S in list(Bp.items()):
            if ft.r(jj) < ft.r(j) and set(S) & set(B[j]):
                merged |= set(S)
        order = {c: k for k, c in enumerate(ft.copies)}
        Bp[j] = sorted(merged, key=order.__getitem__)
    fam = LaminarFamily(list(D) if D is not None else list(Dp), list(Dp), B, Bp)
    check_laminar(ft, fam)
    return fam


def check_laminar(ft: FractionalFt, fam: LaminarFamily) -> None:
    for j in fam.D_prime:
        r = ft.r(j)
        cap = ft.d_max(j) / BALL_CAP_DIV
        if any(ft.d(c, j) > cap for c in fam.B_prime[j]):
            raise LaminarError(f"merged ball of {j} leaves Ball(j, d_max/10)")
        if not ft.volume(fam.B[j]) < r:
            raise LaminarError(f"y(B_j) >= r_j for {j}")
        vol = ft.volume(fam.B_prime[j])
        if not r - 1 <= vol <= r:
            raise LaminarError(f"y(B'_j) = {vol} outside [r_j - 1, r_j] for {j}")
    if not is_laminar(fam.B_prime.values()):
        raise LaminarError("merged balls are not laminar")
