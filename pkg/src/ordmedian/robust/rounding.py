"""Facility duplication, deterministic discretization and iterative rounding."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..core import Instance, Knapsack, MatroidVariant, Robust, Solution, complete, d_set, q
from ..lp import EQ, GE, LE, Constraint, LinearProgram, solve_basic, solve_with_generation
from .extlp import matroid_separation, star_scale


class RoundingError(AssertionError):
    """A structural guarantee of the rounding stage failed at runtime."""


# ---------------------------------------------------------------------------
# duplication


def copy_name(c) -> str:
    return f"{c[0]}#{c[1]}"


def duplicate_and_balance(inst: Instance, x: dict, y: dict, clients, f, scale) -> tuple:
    """Split facilities into co-located copies so that x_ij is a copy-set volume.

    For each facility i and each client j using it (instance order) the copies
    of i are sorted by current star cost and a prefix of volume exactly x_ij
    becomes the part of F_j at i; the last copy is split when needed.
    Returns (copies in order, y per copy, F_j as lists of copies).
    """
    copies: dict = {}  # orig -> list of copies (orig, idx)
    yv: dict = {}
    nxt: dict = {}
    for i in inst.facilities:
        if y.get(i, 0) > 0:
            copies[i] = [(i, 0)]
            yv[(i, 0)] = y[i]
            nxt[i] = 1
    Fj = {j: [(i, 0) for i in inst.facilities if x.get((i, j), 0) > 0] for j in clients}
    cost = {(i, j): f(scale * inst.d(i, j)) for i in inst.facilities for j in clients}

    def star(c):
        return sum((cost[(c[0], j)] for j in clients if c in Fj[j]), Fraction(0))

    for i in inst.facilities:
        J = [j for j in clients if x.get((i, j), 0) > 0]
        for j in J:
            need = x[(i, j)]
            ranked = sorted(copies[i], key=lambda c: (star(c), c[1]))
            chosen = []
            for c in ranked:
                if need == 0:
                    break
                if yv[c] <= need:
                    chosen.append(c)
                    need -= yv[c]
                    continue
                c1, c2 = (i, nxt[i]), (i, nxt[i] + 1)
                nxt[i] += 2
                yv[c1], yv[c2] = need, yv[c] - need
                del yv[c]
                k = copies[i].index(c)
                copies[i][k:k + 1] = [c1, c2]
                for jj in clients:
                    if c in Fj[jj]:
                        t = Fj[jj].index(c)
                        Fj[jj][t:t + 1] = [c1, c2]
                chosen.append(c1)
                need = Fraction(0)
            if need != 0:
                raise RoundingError(f"copies of {i} cannot cover x={x[(i, j)]} for {j}")
            Fj[j] = [c for c in Fj[j] if c[0] != i] + chosen
    order = [c for i in inst.facilities for c in copies.get(i, [])]
    return order, {c: yv[c] for c in order}, Fj


# ---------------------------------------------------------------------------
# discretization


def level_of(d: Fraction, tau: Fraction) -> int:
    """Index l >= -1 of the smallest grid value D_l >= d."""
    if d == 0:
        return -1
    l, v = 0, Fraction(1)
    while v < d:
        v *= tau
        l += 1
    return l


def D(l: int, tau: Fraction) -> Fraction:
    if l == -2:
        return Fraction(-1)
    if l == -1:
        return Fraction(0)
    return q(tau) ** l


# ---------------------------------------------------------------------------
# rounding state and the auxiliary LP


@dataclass
class RoundingState:
    inst: Instance
    params: object
    f: object
    copies: list
    y_star: dict
    clients: list  # C'
    F: dict  # outer balls, keyed by client or by ("v", i) for virtual clients
    level: dict
    S0: tuple
    R: dict | None
    U: Fraction | None
    m_prime: int
    full: list = field(default_factory=list)
    part: list = field(default_factory=list)
    core: list = field(default_factory=list)
    B: dict = field(default_factory=dict)
    dprime: dict = field(default_factory=dict)

    @property
    def variant(self):
        return self.params.variant

    def dp(self, c, j):
        key = (c[0], j)
        if key not in self.dprime:
            self.dprime[key] = D(level_of(self.inst.d(c[0], j), self.params.tau), self.params.tau)
        return self.dprime[key]

    def inner(self, j) -> list:
        bound = D(self.level[j] - 1, self.params.tau)
        return [c for c in self.F[j] if self.dp(c, j) <= bound]

    def outer_level(self, j) -> int:
        if not self.F[j]:
            return -1
        return max(level_of(self.dp(c, j), self.params.tau) for c in self.F[j])


def init_state(inst, params, f, copies, y_star, Fj, clients, S0, R, U, m_prime) -> RoundingState:
    st = RoundingState(inst, params, f, copies, y_star, list(clients), {}, {}, tuple(S0), R, U, m_prime)
    for j in clients:
        st.F[j] = list(Fj[j])
        st.level[j] = st.outer_level(j)
        st.B[j] = st.inner(j)
    for i in S0:
        v = ("v", i)
        st.F[v] = [c for c in copies if c[0] == i]
        st.level[v] = -1
        st.B[v] = []
    st.part = list(clients)
    st.core = [("v", i) for i in S0]
    return st


def aux_objective(st: RoundingState, yv: dict) -> Fraction:
    lam2 = st.params.lam2
    f = st.f
    tot = Fraction(0)
    for j in st.part:
        tot += sum((yv.get(c, 0) * f(lam2 * st.dp(c, j)) for c in st.F[j]), Fraction(0))
    for j in st.full:
        yB = sum((yv.get(c, 0) for c in st.B[j]), Fraction(0))
        tot += sum((yv.get(c, 0) * f(lam2 * st.dp(c, j)) for c in st.B[j]), Fraction(0))
        tot += (1 - yB) * f(lam2 * D(st.level[j], st.params.tau))
    return tot


def build_aux_lp(st: RoundingState):
    inst = st.inst
    lam2 = st.params.lam2
    f = st.f
    tau = st.params.tau
    lp = LinearProgram("aux")
    name = {c: lp.add_var("y" + copy_name(c), 0, 1) for c in st.copies}
    obj: dict = {}
    const = Fraction(0)

    def add(c, a):
        if a:
            obj[name[c]] = obj.get(name[c], 0) + a

    for j in st.part:
        for c in st.F[j]:
            add(c, f(lam2 * st.dp(c, j)))
    for j in st.full:
        outer = f(lam2 * D(st.level[j], tau))
        const += outer
        for c in st.B[j]:
            add(c, f(lam2 * st.dp(c, j)) - outer)
    lp.set_objective(obj, constant=const)

    def row(cs):
        r: dict = {}
        for c in cs:
            r[name[c]] = r.get(name[c], 0) + 1
        return r

    for j in st.core:
        lp.add_constraint(row(st.F[j]), EQ, 1, f"core:{j}")
    for j in st.full:
        if st.B[j]:
            lp.add_constraint(row(st.B[j]), LE, 1, f"inner:{j}")
    for j in st.part:
        if st.F[j]:
            lp.add_constraint(row(st.F[j]), LE, 1, f"outer:{j}")
    v = inst.variant
    oracle = None
    if isinstance(v, Robust):
        lp.add_constraint(row(st.copies), LE, v.k, "cardinality")
    elif isinstance(v, Knapsack):
        lp.add_constraint({name[c]: v.wt[c[0]] for c in st.copies if v.wt[c[0]]}, LE, v.W, "knapsack")
    else:
        groups = {i: [name[c] for c in st.copies if c[0] == i] for i in inst.facilities}
        groups = {i: g for i, g in groups.items() if g}
        for i, g in groups.items():
            lp.add_constraint({n: 1 for n in g}, LE, 1, f"location:{i}")
        M = v.matroid
        if hasattr(M, "parts"):
            for k, (part, cap) in enumerate(zip(M.parts, M.capacities)):
                r = {n: 1 for i in part for n in groups.get(i, [])}
                if r:
                    lp.add_constraint(r, LE, cap, f"rank:part{k}")
        else:
            oracle = matroid_separation(M, groups)
    cov = {}
    for j in st.part:
        for c in st.F[j]:
            cov[name[c]] = cov.get(name[c], 0) + 1
    need = st.m_prime - len(st.full)
    if cov or need > 0:
        lp.add_constraint(cov, GE, need, "coverage")
    return lp, name, oracle


def solve_aux(st: RoundingState):
    lp, name, oracle = build_aux_lp(st)
    sol = solve_with_generation(lp, oracle) if oracle else solve_basic(lp)
    return {c: sol.values[name[c]] for c in st.copies}, sol.objective_value


def ysum(yv, cs) -> Fraction:
    return sum((yv.get(c, 0) for c in cs), Fraction(0))


def colocated_with_S0(st: RoundingState, i) -> bool:
    return any(st.inst.d(i, s) == 0 for s in st.S0)


def check_property(st: RoundingState) -> list[str]:
    """Items 1-5 of the rounding invariant; returns the failed item labels."""
    bad = []
    C = set(st.clients)
    full, part, core = set(st.full), set(st.part), set(st.core)
    virt = {("v", i) for i in st.S0}
    if full & part or (full | part) != C or not virt <= core or not (core - virt) <= full:
        bad.append("1")
    seen = set()
    for j in st.core:
        s = set(st.F[j])
        if s & seen:
            bad.append("2")
            break
        seen |= s
    if st.variant != "matroid":
        tau = st.params.tau
        if any(D(st.level[j], tau) > tau * st.R[j] for j in st.clients):
            bad.append("3")
    if any(st.level[j] < -1 for j in st.level):
        bad.append("4")
    if st.variant != "matroid":
        scale = star_scale(st.variant, st.params.delta)
        lim = 2 * st.params.rho * st.U
        for c in st.copies:
            if colocated_with_S0(st, c[0]):
                continue
            load = sum((st.f(scale * st.inst.d(c[0], j)) for j in st.clients if c in st.F[j]), Fraction(0))
            if load > lim:
                bad.append("5")
                break
    return bad


def update_core(st: RoundingState, j) -> None:
    Fj = set(st.F[j])
    others = [jj for jj in st.core if jj != j]
    if any(st.level[jj] <= st.level[j] and Fj & set(st.F[jj]) for jj in others):
        return
    st.core = [jj for jj in others if not (Fj & set(st.F[jj]))]
    st.core.append(j)


@dataclass
class RoundingTrace:
    objectives: list = field(default_factory=list)
    moves: list = field(default_factory=list)
    property_failures: list = field(default_factory=list)
    fractional: int = 0


def iterative_round(st: RoundingState, trace: RoundingTrace | None = None, max_iters: int | None = None):
    """Run the iterative rounding loop; returns y' over copies.

    Raises RoundingError when the invariant, the monotone objective or the
    fractional-support bound fails.
    """
    trace = trace if trace is not None else RoundingTrace()
    if max_iters is None:
        max_iters = 4 + len(st.clients) * (3 + max([st.level[j] for j in st.clients] + [0]))
    bad = check_property(st)
    if bad:
        trace.property_failures.append((0, bad))
        raise RoundingError(f"invariant items {bad} fail before rounding")
    for it in range(1, max_iters + 1):
        yv, obj = solve_aux(st)
        if trace.objectives and obj > trace.objectives[-1]:
            raise RoundingError(f"auxiliary objective rose from {trace.objectives[-1]} to {obj}")
        trace.objectives.append(obj)
        moved = None
        for j in st.part:
            if st.F[j] and ysum(yv, st.F[j]) == 1:
                moved = ("full", j)
                st.part.remove(j)
                st.full.append(j)
                st.full.sort(key=st.clients.index)
                st.B[j] = st.inner(j)
                update_core(st, j)
                break
        if moved is None:
            for j in st.full:
                if st.B[j] and ysum(yv, st.B[j]) == 1:
                    moved = ("shrink", j)
                    st.level[j] -= 1
                    st.F[j] = st.B[j]
                    st.B[j] = st.inner(j)
                    update_core(st, j)
                    break
        bad = check_property(st)
        if bad:
            trace.property_failures.append((it, bad))
            raise RoundingError(f"invariant items {bad} fail after iteration {it}")
        if moved is None:
            frac = [c for c in st.copies if 0 < yv[c] < 1]
            trace.fractional = len(frac)
            if len(frac) > 2:
                raise RoundingError(f"{len(frac)} fractional values at exit")
            return yv
        trace.moves.append(moved)
    raise RoundingError(f"no exit after {max_iters} iterations")


# ---------------------------------------------------------------------------
# fixing the last fractions and completing


def fix_fractional(st: RoundingState, yv: dict) -> tuple[dict, str]:
    """Integral y-hat from y' with at most two fractions; returns (y-hat, note)."""
    frac = [c for c in st.copies if 0 < yv[c] < 1]
    out = {c: (Fraction(1) if yv[c] == 1 else Fraction(0)) for c in st.copies}
    if not frac:
        return out, "integral"
    if len(frac) > 2:
        raise RoundingError(f"{len(frac)} fractional values")
    variant = st.variant
    if variant == "matroid":
        raise RoundingError("matroid rounding ended non-integral")
    if variant == "robust":
        if len(frac) == 1:
            out[frac[0]] = Fraction(1)
            return out, "single-opened"
        a, b = frac
        if yv[a] + yv[b] != 1:
            raise RoundingError(f"fractional pair sums to {yv[a] + yv[b]}, not 1")
        Ca = [j for j in st.part if a in st.F[j] and b not in st.F[j]]
        Cb = [j for j in st.part if b in st.F[j] and a not in st.F[j]]
        win = a if len(Ca) >= len(Cb) else b
        out[win] = Fraction(1)
        return out, f"pair-opened |C1|={len(Ca)} |C2|={len(Cb)}"
    wt = st.inst.variant.wt
    if len(frac) == 1:
        return out, "single-closed"
    a, b = sorted(frac, key=lambda c: (wt[c[0]], st.copies.index(c)))
    out[a] = Fraction(1)
    opened = {c[0] for c in st.copies if out[c] == 1}
    if sum((wt[i] for i in opened), Fraction(0)) > st.inst.variant.W:
        out[a] = Fraction(0)
        return out, "pair-closed-over-budget"
    return out, "pair-lighter-opened"


def opened_locations(inst: Instance, copies, yhat) -> tuple:
    opened = {c[0] for c in copies if yhat[c] == 1}
    return tuple(i for i in inst.facilities if i in opened)


def complete_solution(inst: Instance, opened, sparse, f, delta) -> Solution:
    """Serve the m' closest clients of C' plus m - m' greedy picks from C \\ C'."""
    if not opened:
        raise RoundingError("rounding opened no facility")
    if not inst.is_feasible_open(opened):
        raise RoundingError(f"opened set {opened} is infeasible")
    v = inst.variant
    if not isinstance(v, Robust):
        return complete(inst, opened)
    delta = q(delta)
    order = {j: k for k, j in enumerate(inst.clients)}
    dist = {j: d_set(inst, j, opened) for j in inst.clients}
    Cp = list(sparse.clients)
    inner = sorted(Cp, key=lambda j: (dist[j], order[j]))[:sparse.m_prime]
    rest = [j for j in inst.clients if j not in set(Cp)]
    need = v.m - sparse.m_prime
    if need > len(rest) or len(inner) < sparse.m_prime:
        raise RoundingError("not enough clients to serve")
    sc = (1 - delta) / (1 + delta)
    outer = sorted(rest, key=lambda j: (f(sc * dist[j]), dist[j], order[j]))[:need]
    return complete(inst, opened, inner + outer)
