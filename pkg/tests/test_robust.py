import random
from fractions import Fraction as F

import pytest

from ordmedian.core import (Instance, Knapsack, MatroidVariant, MetricSpace, MetricViolation, Robust,
                            evaluate_solution, make_explicit_matroid, make_partition_matroid)
from ordmedian.costfn import CostFunction, linear_cost
from ordmedian.gen import gen_instances
from ordmedian.oracle import reduced_optimum, solve_exact
from ordmedian.robust import knapsack_preset, matroid_preset, robust_preset, solve_reduction, solve_robust
from ordmedian.robust.extlp import ExtLPError, build_ext_lp
from ordmedian.robust.params import ParameterError, ReductionParams
from ordmedian.robust.radius import (RadiusBounds, check_density_property, compute_radius_bounds,
                                     knapsack_radius_bounds)
from ordmedian.robust.rounding import (RoundingError, aux_objective, complete_solution, duplicate_and_balance,
                                       fix_fractional, init_state, iterative_round, level_of)
from ordmedian.robust.sparse import (SparseInstance, build_sparse_instance, check_sparse_conditions,
                                     enumerate_sparse_instances, guess_U)


def line(F_pos, C_pos):
    fac = [f"f{k}" for k in range(len(F_pos))]
    cli = [f"c{k}" for k in range(len(C_pos))]
    return MetricSpace.from_points_l1(fac, cli, [(x, 0) for x in list(F_pos) + list(C_pos)])


# --- parameters -----------------------------------------------------------

def test_presets():
    p = robust_preset()
    assert abs(float(p.lam) - 0.008856) < 1e-5
    assert p.lam <= p.lam2 <= p.lam1 <= 2 / (2 + p.delta)
    assert p.lam1 == p.lam * p.tau * (3 * p.tau - 1) / (p.tau - 1)
    k = knapsack_preset()
    assert k.delta == F(2, 3) and k.lam1 <= 1
    m = matroid_preset()
    assert m.lam1 == 1 and m.lam2 == 1 / m.tau


def test_param_overrides_are_validated():
    p = robust_preset()
    assert p.with_overrides(tau=F(2)).lam < p.lam1
    with pytest.raises(ParameterError):
        p.with_overrides(lam=F(1, 10))
    with pytest.raises(ParameterError):
        p.with_overrides(delta=F(3, 2))
    with pytest.raises(ParameterError):
        ReductionParams("knapsack", F(1, 4), F(2, 3), F(1, 2), F(9, 5), F(1, 2)).validate()


# --- sparse instances -----------------------------------------------------

def robust_case():
    m = line([0, 20], [0, 2, 3, 19, 21, 40])
    return Instance(m, (F(3), F(2), F(1), F(1), F(1)), Robust(2, 5))


def test_sparse_rho_one_keeps_everything():
    inst = robust_case()
    f = linear_cost(F(1))
    red = reduced_optimum(inst, f)
    U = guess_U(inst, f, F(1, 4), red.opt_value)
    sp = build_sparse_instance(inst, f, U, F(1), F(1, 2), red)
    assert sp.S0 == () and sp.clients == inst.clients and sp.m_prime == 5
    assert all(check_sparse_conditions(inst, sp, f, F(1), F(1, 2), red).values())


def test_sparse_heavy_star_enters_S0():
    m = line([0, 50], [0, 10])
    inst = Instance(m, (F(1),), Robust(1, 1))
    f = linear_cost(F(1))
    red = reduced_optimum(inst, f)
    assert red.opt_value == 0
    inst = Instance(line([0, 50], [10, 60]), (F(1),), Robust(1, 1))
    red = reduced_optimum(inst, f)
    assert red.opt_value == 10 and red.served == ("c0",)
    sp = build_sparse_instance(inst, f, F(10), F(1, 2), F(1, 2), red)
    assert sp.S0 == ("f0",)


def test_sparse_conditions_replay_on_corpus():
    for inst in gen_instances(8, 5, 7, "robust", grid=30, seed=3):
        opt = solve_exact(inst)
        if opt.opt_value == 0:
            continue
        from ordmedian.oracle import correct_guesses
        f = correct_guesses(inst, opt, F(1, 4)).cost_function()
        red = reduced_optimum(inst, f)
        U = guess_U(inst, f, F(1, 4), red.opt_value)
        assert red.opt_value <= U < F(5, 4) * red.opt_value
        for rho in (F(1, 2), F(1, 4), F(1, 8)):
            sp = build_sparse_instance(inst, f, U, rho, F(81765, 100000), red)
            assert all(check_sparse_conditions(inst, sp, f, rho, F(81765, 100000), red).values())
            assert len(sp.S0) <= 2 / rho + 2


def test_sparse_stream_membership_and_cap():
    inst = Instance(line([0, 6], [1, 4, 9]), (F(1), F(1)), Robust(1, 2))
    f = linear_cost(F(1))
    red = reduced_optimum(inst, f)
    U = guess_U(inst, f, F(1), red.opt_value)
    sp = build_sparse_instance(inst, f, U, F(1, 2), F(1, 2), red)
    keys = [s.key() for s in enumerate_sparse_instances(inst, F(1, 2), F(1, 2), U)]
    assert sp.key() in keys and len(keys) == len(set(keys))
    st = enumerate_sparse_instances(inst, F(1, 2), F(1, 2), U, cap=1)
    assert len(list(st)) == 1 and st.truncated
    assert all(len(s.S0) <= 1 for s in enumerate_sparse_instances(inst, F(2), F(1, 2), U))


# --- radius bounds --------------------------------------------------------

def test_radius_huge_rho_and_tiny_rho():
    inst = robust_case()
    sp = SparseInstance(inst.clients, 5, (), F(10))
    f = linear_cost(F(1))
    big = compute_radius_bounds(inst, sp, f, F(10 ** 6), F(1, 2))
    dmax = max(inst.d(i, j) for i in inst.facilities for j in inst.clients)
    assert set(big.R_hat.values()) == {dmax}
    steep = linear_cost(F(10 ** 6))
    tiny = compute_radius_bounds(inst, sp, steep, F(1, 10 ** 6), F(1, 2))
    assert set(tiny.R_hat.values()) == {0}
    for b in (big, tiny):
        assert check_density_property(inst, sp, b, f if b is big else steep,
                                      F(10 ** 6) if b is big else F(1, 10 ** 6), F(1, 2))


def test_radius_hand_trace():
    # f0 at 0, f1 at 5, both clients at 3; distances {3, 2}; delta = 1/2,
    # f = x, rho U = 2, so the check is count * 7t/16 <= 2
    inst = Instance(line([0, 5], [3, 3]), (F(1),), Robust(1, 1))
    sp = SparseInstance(inst.clients, 1, (), F(2))
    b = compute_radius_bounds(inst, sp, linear_cost(F(1)), F(1), F(1, 2))
    assert b.R_hat == {"c0": 3, "c1": 2}
    assert b.R == {"c0": F(33, 8), "c1": F(11, 4)}


def test_knapsack_radius_is_supremum():
    inst = Instance(line([0], [0, 4, 30]), (F(1),) * 3, Knapsack({"f0": F(1)}, F(1)))
    sp = SparseInstance(inst.clients, 3, (), F(8))
    f = linear_cost(F(1))
    delta, rho = F(1, 2), F(1, 2)
    b = knapsack_radius_bounds(inst, sp, f, rho, delta)
    # c0: count 1 until R = 8 where c1 joins; f(R/2) <= 4 gives R <= 8, and at
    # R = 8 the count is 2, so the supremum is 8 (not attained)
    assert b.R["c0"] == 8
    for j, R in b.R.items():
        cnt = lambda x: sum(1 for jj in inst.clients if inst.d(j, jj) <= delta * x)
        assert cnt(R * F(999, 1000)) * f((1 - delta) * R * F(999, 1000)) <= rho * 8
        assert cnt(R * F(1001, 1000)) * f((1 - delta) * R * F(1001, 1000)) > rho * 8


# --- the strengthened relaxation -------------------------------------------

def test_ext_lp_radius_and_preselected_rows():
    inst = Instance(line([0, 10], [0, 7]), (F(1), F(1)), Robust(2, 2))
    p = robust_preset()
    sp = SparseInstance(inst.clients, 2, ("f1",), F(100))
    bounds = RadiusBounds({"c0": F(0), "c1": F(8)}, {"c0": F(0), "c1": F(11)})
    ext = build_ext_lp(inst, p, linear_cost(F(1)), sp, bounds)
    assert ("f0", "c0") in ext.pairs and ("f1", "c0") not in ext.pairs
    x, y, val, _ = ext.solve()
    assert y["f1"] == 1
    with pytest.raises(ExtLPError):
        build_ext_lp(inst, p.__class__("robust", p.eps, p.delta, p.rho, p.tau, F(1, 3)), linear_cost(F(1)),
                     sp, bounds)


# --- duplication ------------------------------------------------------------

def test_duplication_no_split_and_shared_split():
    inst = Instance(line([0], [1, 2]), (F(1), F(1)), Robust(1, 2))
    f = linear_cost(F(1))
    copies, yv, Fj = duplicate_and_balance(inst, {("f0", "c0"): F(1)}, {"f0": F(1)}, ["c0"], f, F(1))
    assert copies == [("f0", 0)] and Fj == {"c0": [("f0", 0)]}
    x = {("f0", "c0"): F(1, 2), ("f0", "c1"): F(1, 2)}
    copies, yv, Fj = duplicate_and_balance(inst, x, {"f0": F(1)}, ["c0", "c1"], f, F(1))
    assert [yv[c] for c in copies] == [F(1, 2), F(1, 2)]
    assert Fj["c0"] == [("f0", 1)] and Fj["c1"] == [("f0", 2)]
    # volume per (i, j) equals x_ij, so the objective is preserved
    for (i, j), v in x.items():
        assert sum(yv[c] for c in Fj[j] if c[0] == i) == v


def test_duplication_star_balance_on_corpus():
    p = robust_preset()
    for inst in gen_instances(6, 5, 7, "robust", grid=30, seed=9):
        rep = solve_robust(inst, p)
        if rep.opt == 0:
            continue
        assert rep.checks["property"] and rep.checks["reprice"]


# --- rounding -----------------------------------------------------------------

def test_levels():
    tau = F(9, 5)
    assert level_of(F(0), tau) == -1 and level_of(F(1), tau) == 0
    assert level_of(F(9, 5), tau) == 1 and level_of(F(2), tau) == 2


def manual_state(inst, params, copies, y, Fj, clients, U=F(100), m_prime=None):
    R = {j: F(10 ** 6) for j in clients}
    return init_state(inst, params, linear_cost(F(1)), copies, y, Fj, clients, (), R, U,
                      len(clients) if m_prime is None else m_prime)


def test_integral_start_exits_after_one_solve():
    inst = Instance(line([0, 10], [1, 9]), (F(1), F(1)), Robust(2, 2))
    p = robust_preset()
    copies = [("f0", 0), ("f1", 0)]
    st = manual_state(inst, p, copies, {c: F(1) for c in copies},
                      {"c0": [("f0", 0)], "c1": [("f1", 0)]}, ["c0", "c1"])
    from ordmedian.robust.rounding import RoundingTrace
    tr = RoundingTrace()
    yv = iterative_round(st, tr)
    assert all(yv[c] in (0, 1) for c in copies) and tr.fractional == 0
    assert tr.objectives[0] <= aux_objective(st, {c: F(1) for c in copies}) + 1


def test_fix_knapsack_pair_opens_lighter():
    inst = Instance(line([0, 10], [1, 9]), (F(1), F(1)), Knapsack({"f0": F(5), "f1": F(3)}, F(5)))
    p = knapsack_preset()
    copies = [("f0", 0), ("f1", 0)]
    st = manual_state(inst, p, copies, {c: F(1, 2) for c in copies},
                      {"c0": copies[:1], "c1": copies[1:]}, ["c0", "c1"])
    out, note = fix_fractional(st, {copies[0]: F(1, 2), copies[1]: F(1, 2)})
    assert out == {copies[0]: 0, copies[1]: 1}
    out, note = fix_fractional(st, {copies[0]: F(1, 2), copies[1]: F(0)})
    assert out == {copies[0]: 0, copies[1]: 0} and note == "single-closed"


def test_fix_robust_pair_by_exclusive_part_clients():
    inst = Instance(line([0, 10], [1, 2, 3, 9]), (F(1),) * 2, Robust(1, 2))
    p = robust_preset()
    a, b = ("f0", 0), ("f1", 0)
    Fj = {"c0": [a], "c1": [a], "c2": [a], "c3": [b]}
    st = manual_state(inst, p, [a, b], {a: F(1, 2), b: F(1, 2)}, Fj, ["c0", "c1", "c2", "c3"])
    out, _ = fix_fractional(st, {a: F(1, 2), b: F(1, 2)})
    assert out == {a: 1, b: 0}
    Fj = {"c0": [b], "c1": [b], "c2": [b], "c3": [a]}
    st = manual_state(inst, p, [a, b], {a: F(1, 2), b: F(1, 2)}, Fj, ["c0", "c1", "c2", "c3"])
    assert fix_fractional(st, {a: F(1, 2), b: F(1, 2)})[0] == {a: 0, b: 1}
    with pytest.raises(RoundingError):
        fix_fractional(st, {a: F(1, 3), b: F(1, 3)})
    assert fix_fractional(st, {a: F(1), b: F(0)})[1] == "integral"


def test_complete_solution_greedy_outside():
    inst = Instance(line([0], [0, 1, 3, 50]), (F(1),) * 3, Robust(1, 3))
    sp = SparseInstance(("c0", "c1"), 2, ("f0",), F(10))
    sol = complete_solution(inst, ("f0",), sp, linear_cost(F(1)), F(1, 2))
    assert sol.served == ("c0", "c1", "c2")
    sp = SparseInstance(("c0", "c1", "c2"), 3, (), F(10))
    assert complete_solution(inst, ("f0",), sp, linear_cost(F(1)), F(1, 2)).served == ("c0", "c1", "c2")
    with pytest.raises(RoundingError):
        complete_solution(inst, (), sp, linear_cost(F(1)), F(1, 2))


# --- end to end ---------------------------------------------------------------

def test_zero_optimum_short_circuit():
    inst = Instance(line([0, 5], [0, 5, 5]), (F(2), F(1)), Robust(2, 2))
    rep = solve_robust(inst)
    assert rep.cost == 0 and rep.checks.get("zero_opt")


def test_rejects_subunit_distances():
    m = MetricSpace.from_matrix(["f0"], ["c0"], [[0, F(1, 2)], [F(1, 2), 0]])
    inst = Instance(m, (F(1),), Robust(1, 1))
    with pytest.raises(MetricViolation):
        solve_robust(inst)


@pytest.mark.parametrize("variant,bound", [("robust", 127), ("knapsack", F(416, 10)), ("matroid", F(198, 10))])
def test_small_corpus_bounds(variant, bound):
    for inst in gen_instances(6, 5, 6, variant, grid=40, seed=21):
        rep = solve_reduction(inst)
        assert rep.cost >= rep.opt
        if rep.opt:
            assert rep.cost <= bound * rep.opt
            assert all(rep.checks.values()), rep.checks


def test_uniform_matroid_as_partition_and_explicit():
    import itertools
    rng = random.Random(4)
    for _ in range(4):
        fp = [rng.randint(0, 30) for _ in range(4)]
        cp = [rng.randint(0, 30) for _ in range(5)]
        m = line(fp, cp)
        w = tuple(sorted((F(rng.randint(1, 4)) for _ in cp), reverse=True))
        part = Instance(m, w, MatroidVariant(make_partition_matroid(m.facility_ids, [m.facility_ids], [2])))
        expl = Instance(m, w, MatroidVariant(make_explicit_matroid(
            m.facility_ids, [s for t in range(3) for s in itertools.combinations(m.facility_ids, t)])))
        rob = Instance(m, w, Robust(2, len(cp)))
        opt = solve_exact(rob)
        for inst in (part, expl):
            rep = solve_reduction(inst)
            assert solve_exact(inst).opt_value == opt.opt_value
            assert opt.opt_value <= rep.cost <= F(198, 10) * opt.opt_value
            assert len(rep.solution.open) <= 2


def test_modes_agree_on_tiny_instance():
    inst = Instance(line([0, 3, 4], [0, 1, 3, 4]), (F(1),) * 3, Robust(2, 3))
    p = robust_preset(eps=F(2), rho=F(2))
    opt = solve_exact(inst)
    a = solve_robust(inst, p, opt=opt)
    b = solve_robust(inst, p, mode="enumerate", opt=opt)
    assert not b.truncated and b.cost <= a.cost
    assert evaluate_solution(inst, b.solution)[1] == b.cost
