import itertools
import random
from fractions import Fraction as F

import pytest

from helpers import all_rows, brute_force_optimum, random_tiny_lp, rank
from ordmedian.lp import (Constraint, Infeasible, LinearProgram, LPError, RoundLimit, Unbounded,
                          decompose_to_vertices, sample_vertex, solve_basic, solve_with_generation,
                          top_ell_oracle)


def box(n, hi=1):
    lp = LinearProgram()
    for k in range(n):
        lp.add_var(f"x{k + 1}", 0, hi)
    return lp


def test_box_maximum():
    lp = box(2)
    lp.set_objective({"x1": 1, "x2": 1}, "max")
    sol = solve_basic(lp)
    assert sol.values == {"x1": 1, "x2": 1}
    assert sol.objective_value == 2


def test_bound_tight_minimum():
    lp = LinearProgram()
    lp.add_var("x")
    lp.add_constraint({"x": 1}, ">=", "2/3")
    lp.set_objective({"x": 1})
    assert solve_basic(lp).objective_value == F(2, 3)


def test_segment_returns_a_vertex():
    lp = box(2)
    lp.add_constraint({"x1": 1, "x2": 1}, "=", 1)
    lp.set_objective({})
    vals = solve_basic(lp).values
    assert (vals["x1"], vals["x2"]) in {(1, 0), (0, 1)}


def test_infeasible_and_unbounded_are_distinct():
    lp = box(1)
    lp.add_constraint({"x1": 1}, ">=", 2)
    with pytest.raises(Infeasible):
        solve_basic(lp)
    lp = LinearProgram()
    lp.add_var("x")
    lp.set_objective({"x": 1}, "max")
    with pytest.raises(Unbounded):
        solve_basic(lp)
    assert not issubclass(Infeasible, Unbounded) and not issubclass(Unbounded, Infeasible)


def test_free_and_upper_only_variables():
    lp = LinearProgram()
    lp.add_var("f", None, None)
    lp.add_var("u", None, 3)
    lp.add_constraint({"f": 1, "u": 1}, ">=", -2)
    lp.add_constraint({"f": 1}, ">=", -7)
    lp.add_constraint({"f": 1, "u": -1}, "<=", 1)
    lp.set_objective({"f": 1, "u": 2})
    sol = solve_basic(lp)
    assert lp.is_feasible(sol.values)
    # f + 2u with f >= -2-u, f >= -7, f <= 1+u: minimum at u=-3/2... check by LP duality bound
    assert sol.objective_value == brute_force_optimum(lp)


def test_fixed_variables_are_substituted():
    lp = LinearProgram()
    lp.add_var("a", 2, 2)
    lp.add_var("b", 0, 5)
    lp.add_constraint({"a": 1, "b": 1}, "<=", 4)
    lp.set_objective({"b": 1}, "max")
    sol = solve_basic(lp)
    assert sol.values == {"a": 2, "b": 2}


def test_redundant_equalities():
    lp = box(2, 3)
    lp.add_constraint({"x1": 1, "x2": 1}, "=", 2)
    lp.add_constraint({"x1": 2, "x2": 2}, "=", 4)
    lp.set_objective({"x1": 1, "x2": 3})
    sol = solve_basic(lp)
    assert sol.values == {"x1": 2, "x2": 0}


def _is_basic(lp, values):
    rows = [vec for vec, rhs, _ in all_rows(lp)
            if sum(F(a) * values[v] for a, v in zip(vec, lp.vars)) == rhs]
    return rows and rank(rows) == len(lp.vars)


def test_random_tiny_lps_match_vertex_enumeration():
    rng = random.Random(7)
    checked = 0
    for _ in range(200):
        lp = random_tiny_lp(rng)
        best = brute_force_optimum(lp)
        if best is None:
            with pytest.raises(Infeasible):
                solve_basic(lp)
            continue
        sol = solve_basic(lp)
        assert lp.is_feasible(sol.values)
        assert sol.objective_value == best
        assert _is_basic(lp, sol.values)
        checked += 1
    assert checked > 100


def test_generation_top_ell_example():
    # three clients whose LP costs are fixed at 5, 3, 2 and R fixed at 7
    lp = LinearProgram()
    for j, c in zip("abc", (5, 3, 2)):
        lp.add_var(j, c, c)
    lp.add_var("R", 7, 7)
    terms = {j: {j: 1} for j in "abc"}
    cuts = top_ell_oracle(terms, 2, "R")({"a": 5, "b": 3, "c": 2, "R": 7})
    assert len(cuts) == 1
    cut = cuts[0]
    assert set(cut.coeffs) == {"a", "b", "R"}
    assert -cut.slack({"a": 5, "b": 3, "c": 2, "R": 7}) == 1


def test_generation_vacuous_round():
    lp = box(2)
    lp.set_objective({"x1": -1})
    sol = solve_with_generation(lp, lambda v: [])
    assert sol.rounds == 1 and sol.values == {"x1": 1, "x2": 0}


def test_generation_partition_part_returned():
    lp = box(3)
    lp.set_objective({"x1": -1, "x2": -1, "x3": -1})
    parts = {"P": ["x1", "x2"], "Q": ["x3"]}
    caps = {"P": 1, "Q": 1}
    seen = []

    def oracle(vals):
        out = []
        for p, members in parts.items():
            if sum(vals[v] for v in members) > caps[p]:
                out.append(Constraint({v: 1 for v in members}, "<=", caps[p], f"rank:{p}"))
                seen.append(p)
        return out

    sol = solve_with_generation(lp, oracle)
    assert seen == ["P"]
    assert sol.objective_value == -2


def test_generation_round_limit():
    lp = box(1)
    lp.set_objective({"x1": -1})
    counter = iter(range(100))

    def oracle(vals):
        k = next(counter)
        return [Constraint({"x1": 1}, "<=", F(1, k + 2), f"cut{k}")]

    with pytest.raises(RoundLimit):
        solve_with_generation(lp, oracle, max_rounds=5)


@pytest.mark.parametrize("n,ell", [(n, ell) for n in range(2, 9) for ell in (1, n // 2, n)])
def test_lazy_top_ell_exhaustive(n, ell):
    rng = random.Random(100 * n + ell)
    lp = LinearProgram()
    costs = [F(rng.randint(0, 9)) for _ in range(n)]
    for j in range(n):
        lp.add_var(f"x{j}", 0, 1)
    lp.add_var("R", 0, None)
    lp.add_constraint({f"x{j}": 1 for j in range(n)}, ">=", F(n, 2))
    lp.set_objective({"R": 1})
    terms = {j: {f"x{j}": costs[j]} for j in range(n)}
    sol = solve_with_generation(lp, top_ell_oracle(terms, ell, "R"))
    for S in itertools.combinations(range(n), ell):
        assert sum(costs[j] * sol.values[f"x{j}"] for j in S) <= sol.values["R"]


def test_decompose_segment_midpoint():
    lp = box(2)
    lp.add_constraint({"x1": 1, "x2": 1}, "=", 1)
    dec = decompose_to_vertices(lp, {"x1": F(1, 2), "x2": F(1, 2)})
    assert sorted((w, tuple(z.values())) for w, z in dec.terms) == [(F(1, 2), (0, 1)), (F(1, 2), (1, 0))]


def test_decompose_integral_point_single_term():
    lp = box(2)
    dec = decompose_to_vertices(lp, {"x1": 1, "x2": 0})
    assert dec.terms == [(1, {"x1": 1, "x2": 0})]


def test_decompose_barycenter():
    lp = box(3)
    lp.add_constraint({"x1": 1, "x2": 1, "x3": 1}, "=", 1)
    point = {"x1": F(1, 3), "x2": F(1, 3), "x3": F(1, 3)}
    dec = decompose_to_vertices(lp, point)
    assert len(dec.terms) == 3
    assert all(w == F(1, 3) for w, _ in dec.terms)
    assert dec.mean() == point


def test_decompose_random_points_of_cardinality_polytope():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randint(2, 6)
        k = rng.randint(1, n - 1)
        lp = box(n)
        lp.add_constraint({f"x{i + 1}": 1 for i in range(n)}, "=", k)
        # random convex combination of k-subsets
        subsets = [rng.sample(range(n), k) for _ in range(3)]
        lam = [F(rng.randint(1, 5)) for _ in subsets]
        tot = sum(lam)
        point = {f"x{i + 1}": sum(l / tot for l, S in zip(lam, subsets) if i in S) for i in range(n)}
        dec = decompose_to_vertices(lp, point)
        assert dec.total_weight() == 1
        mean = dec.mean()
        assert all(mean[v] == point[v] for v in point)
        for w, z in dec.terms:
            assert w > 0 and lp.is_feasible(z)


def test_decompose_rejects_infeasible_and_nonintegral():
    lp = box(2)
    lp.add_constraint({"x1": 1, "x2": 1}, "=", 1)
    with pytest.raises(LPError):
        decompose_to_vertices(lp, {"x1": 1, "x2": 1})
    lp2 = box(2)
    lp2.add_constraint({"x1": 2, "x2": 2}, "<=", 1)
    with pytest.raises(LPError):
        decompose_to_vertices(lp2, {"x1": F(1, 8), "x2": F(1, 8)})


def test_sampling_single_and_binomial():
    lp = box(2)
    lp.add_constraint({"x1": 1, "x2": 1}, "=", 1)
    single = decompose_to_vertices(lp, {"x1": 1, "x2": 0})
    rng = random.Random(1)
    assert all(sample_vertex(single, rng)["x1"] == 1 for _ in range(50))
    half = decompose_to_vertices(lp, {"x1": F(1, 2), "x2": F(1, 2)})
    N = 10_000
    hits = sum(sample_vertex(half, rng)["x1"] for _ in range(N))
    sigma = (N * 0.25) ** 0.5
    assert abs(hits - N / 2) <= 5 * sigma


def test_sampling_is_seeded():
    lp = box(3)
    lp.add_constraint({"x1": 1, "x2": 1, "x3": 1}, "=", 1)
    dec = decompose_to_vertices(lp, {"x1": F(1, 3), "x2": F(1, 6), "x3": F(1, 2)})
    a = [tuple(sample_vertex(dec, random.Random(9)).values()) for _ in range(3)]
    r1, r2 = random.Random(42), random.Random(42)
    assert [sample_vertex(dec, r1) for _ in range(100)] == [sample_vertex(dec, r2) for _ in range(100)]
    assert len(set(a)) == 1


def test_dump_is_plain_text():
    lp = box(1)
    lp.add_constraint({"x1": F(1, 3)}, "<=", F(2, 7), "row")
    text = lp.dump()
    assert "row: 1/3 x1 <= 2/7" in text
