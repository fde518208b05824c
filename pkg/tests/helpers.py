"""Exact linear algebra and random generators shared by the tests."""
import itertools
import random
from fractions import Fraction

from ordmedian.lp import EQ, GE, LE, LinearProgram


def rank(rows):
    m = [list(map(Fraction, r)) for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def solve_square(A, b):
    n = len(A)
    m = [list(map(Fraction, row)) + [Fraction(bb)] for row, bb in zip(A, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * bb for a, bb in zip(m[i], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def all_rows(lp):
    """(coeff vector, rhs, is_equality) for every constraint and finite bound, as <=."""
    vs = lp.vars
    out = []
    for c in lp.constraints:
        vec = [c.coeffs.get(v, 0) for v in vs]
        if c.sense == GE:
            out.append(([-a for a in vec], -c.rhs, False))
        else:
            out.append((vec, c.rhs, c.sense == EQ))
    for k, v in enumerate(vs):
        e = [0] * len(vs)
        if lp.lo[v] is not None:
            e2 = list(e); e2[k] = -1
            out.append((e2, -lp.lo[v], False))
        if lp.hi[v] is not None:
            e2 = list(e); e2[k] = 1
            out.append((e2, lp.hi[v], False))
    return out


def brute_force_optimum(lp):
    """Best objective over all vertices (None when no vertex is feasible)."""
    vs = lp.vars
    rows = all_rows(lp)
    best = None
    for combo in itertools.combinations(range(len(rows)), len(vs)):
        A = [rows[i][0] for i in combo]
        b = [rows[i][1] for i in combo]
        x = solve_square(A, b)
        if x is None:
            continue
        vals = dict(zip(vs, x))
        if not lp.is_feasible(vals):
            continue
        val = lp.evaluate(vals)
        if best is None or (val < best if lp.sense == "min" else val > best):
            best = val
    return best


def random_tiny_lp(rng: random.Random):
    n = rng.randint(1, 4)
    lp = LinearProgram("rand")
    for k in range(n):
        kind = rng.random()
        if kind < 0.7:
            lp.add_var(f"x{k}", 0, rng.randint(1, 5))
        else:
            lo = rng.randint(-4, 0)
            lp.add_var(f"x{k}", lo, lo + rng.randint(0, 6))
    # most rows are made to hold at a random interior anchor so that many LPs are feasible
    anchor = {v: lp.lo[v] + (lp.hi[v] - lp.lo[v]) * Fraction(rng.randint(0, 4), 4) for v in lp.vars}
    for c in range(rng.randint(0, 6)):
        coeffs = {f"x{k}": Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for k in range(n)
                  if rng.random() < 0.8}
        sense = rng.choice([LE, LE, GE, EQ])
        at = sum((a * anchor[v] for v, a in coeffs.items()), Fraction(0))
        if rng.random() < 0.85:
            shift = Fraction(rng.randint(0, 6), rng.randint(1, 3))
            rhs = at if sense == EQ else at + shift if sense == LE else at - shift
        else:
            rhs = Fraction(rng.randint(-6, 10), rng.randint(1, 3))
        lp.add_constraint(coeffs, sense, rhs)
    lp.set_objective({f"x{k}": rng.randint(-5, 5) for k in range(n)}, rng.choice(["min", "max"]))
    return lp
