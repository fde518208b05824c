import itertools
import random
from fractions import Fraction as F

import pytest

from ordmedian.core import (FaultTolerant, Instance, Knapsack, MatroidVariant, MetricSpace, Robust,
                            Solution, evaluate_solution, make_partition_matroid, ordered_cost,
                            pad_weights)
from ordmedian.costfn import CostFunction, interval_count, linear_cost
from ordmedian.oracle import (BudgetExceeded, NoFeasibleSet, correct_guesses, enumerate_guesses,
                              reduced_instance_opt, served_by_subset_bruteforce, solve_exact,
                              solve_ft_exact, solve_robust_exact)


def line(F_pos, C_pos):
    fac = [f"f{k}" for k in range(len(F_pos))]
    cli = [f"c{k}" for k in range(len(C_pos))]
    return MetricSpace.from_points_l1(fac, cli, [(x, 0) for x in list(F_pos) + list(C_pos)])


def test_robust_examples():
    inst = Instance(line([0, 10], [0, 10]), (1,), Robust(1, 1))
    assert solve_robust_exact(inst).opt_value == 0
    inst = Instance(line([0, 10], [0, 4, 10]), (1, 1), Robust(1, 2))
    opt = solve_robust_exact(inst)
    assert opt.opt_value == 4 and opt.open == ("f0",)
    inst = Instance(line([0, 10], [0, 4, 10]), (1, 0), Robust(1, 2))
    assert solve_robust_exact(inst).opt_value == 4


def test_partition_forced_choice():
    m = line([0, 5], [1, 2])
    inst = Instance(m, (1, 1), MatroidVariant(make_partition_matroid(m.facility_ids, [["f0"], ["f1"]], [1, 0])))
    assert solve_exact(inst).open == ("f0",)


def test_knapsack_filter_and_empty_family():
    m = line([0, 5], [1, 2])
    inst = Instance(m, (1, 1), Knapsack({"f0": F(3), "f1": F(5)}, F(4)))
    assert solve_exact(inst).open == ("f0",)
    with pytest.raises(Exception):
        Instance(m, (1, 1), Knapsack({"f0": F(3), "f1": F(5)}, F(2)))


def test_ft_examples():
    inst = Instance(line([0, 3, 7], [0]), (1,), FaultTolerant(2, {"c0": 2}))
    opt = solve_ft_exact(inst)
    assert opt.open == ("f0", "f1") and opt.opt_value == 3 and opt.xi == [3, 0]
    inst = Instance(line([0, 3, 7], [0, 5]), (2, 1), FaultTolerant(3, {"c0": 2, "c1": 1}))
    assert solve_ft_exact(inst).open == ("f0", "f1", "f2")


def test_ft_r1_matches_kmedian_enumeration():
    rng = random.Random(11)
    for _ in range(15):
        fp = [rng.randint(0, 30) for _ in range(rng.randint(2, 5))]
        cp = [rng.randint(0, 30) for _ in range(rng.randint(1, 5))]
        m = line(fp, cp)
        k = rng.randint(1, len(fp))
        w = sorted((F(rng.randint(0, 5)) for _ in cp), reverse=True)
        ft = Instance(m, w, FaultTolerant(k, {j: 1 for j in m.client_ids}))
        rob = Instance(m, w, Robust(k, len(cp)))
        assert solve_ft_exact(ft).opt_value == solve_robust_exact(rob).opt_value


def test_budget_guard():
    inst = Instance(line(list(range(12)), list(range(10))), [1] * 10, Robust(6, 10))
    with pytest.raises(BudgetExceeded):
        solve_exact(inst, budget=1000)


def test_serving_closest_clients_is_optimal():
    rng = random.Random(2)
    for _ in range(30):
        fp = [rng.randint(0, 20) for _ in range(3)]
        cp = [rng.randint(0, 20) for _ in range(rng.randint(2, 8))]
        mm = rng.randint(1, len(cp))
        w = sorted((F(rng.randint(0, 4)) for _ in range(mm)), reverse=True)
        inst = Instance(line(fp, cp), w, Robust(2, mm))
        for S in itertools.combinations(inst.facilities, 2):
            assert evaluate_solution(inst, Solution(S))[1] == served_by_subset_bruteforce(inst, S)


# --- cost function ------------------------------------------------------

def test_cost_function_intervals():
    f = CostFunction(F(100), F(1), 2, (F(8), F(4), F(2), F(1)))
    assert f.T == 2
    # I3=[0,50], I2=(50,100], I1=(100,200], I0=(200,inf)
    assert [up for up, _ in f.pieces] == [50, 100, 200, None]
    assert f.interval_of(F(50)) == 3 and f.interval_of(F(100)) == 2
    assert f.interval_of(F(200)) == 1 and f.interval_of(F(201)) == 0
    g = CostFunction(F(100), F(1), 2, (F(1), F(1), F(1, 2), F(1, 2)))
    assert g(F(60)) == 30
    h = CostFunction(F(100), F(1), 2, (F(3),) * 4)
    assert all(h(F(x)) == 3 * x for x in (0, 7, 55, 140, 900))
    with pytest.raises(ValueError):
        CostFunction(F(100), F(1), 2, (F(1), F(2), F(2), F(2)))


def test_cost_function_scaling_property():
    rng = random.Random(4)
    f = CostFunction(F(37), F(1, 2), 5, (F(9, 4), F(3, 2), F(3, 2), F(1), F(2, 3), F(4, 9), F(4, 9), F(8, 27)))
    assert len(f.slopes) == f.T + 2
    for _ in range(500):
        z = F(rng.randint(1, 4000), rng.randint(1, 30))
        a = F(rng.randint(1, 100), 100)
        assert f(a * z) <= a * f(z)
        assert f(z) <= f(z + F(1, 7))


def test_inverse_le():
    f = CostFunction(F(100), F(1), 2, (F(8), F(4), F(2), F(1)))
    for v in [F(0), F(10), F(50), F(51), F(199), F(200), F(400), F(401), F(2000)]:
        x = f.inverse_le(v)
        assert f(x) <= v
        assert f(x + F(1, 10 ** 6)) > v


# --- guesses -------------------------------------------------------------

def test_correct_guesses_hand_example():
    # o = (100, 30), w~ = (1,1), eps = 1, m = 2: both entries in I2 = (50,100]? 30 is in I3=[0,50]
    m = line([0], [100, 30])
    inst = Instance(m, (1, 1), Robust(1, 2))
    opt = solve_exact(inst)
    g = correct_guesses(inst, opt, 1)
    assert g.o1 == 100 and len(g.slopes) == interval_count(F(1), 2) + 2
    assert g.slopes == (1, 1, 1, 1)


def test_correct_guesses_average_weights():
    m = line([0], [100, 60, 30, 1])
    inst = Instance(m, (8, 4, 2, 1), Robust(1, 4))
    opt = solve_exact(inst)
    g = correct_guesses(inst, opt, 1)
    f = g.cost_function()
    # T: 2^T > 4 -> T = 3, base 25: I4=[0,25], I3=(25,50], I2=(50,100], I1=(100,200]
    assert f.T == 3
    # w~ = (8,4,2,2) ; I2 holds 100,60 -> avg 6 -> 8 ; I3 holds 30 -> 2 ; I4 holds 1 -> 2
    assert g.slopes == (8, 8, 8, 2, 2)


def test_zero_optimum_guess():
    m = line([0, 5], [0, 5])
    inst = Instance(m, (3, 1), Robust(2, 2))
    g = correct_guesses(inst, solve_exact(inst), F(1, 4))
    assert g.o1 == 0 and g.slopes == (3,)
    f = g.cost_function()
    assert f(F(7)) == 21


def test_ft_threshold_example():
    # xi = (4,3,1), n = 3, delta = eps = 1
    m = MetricSpace.from_matrix(["a", "b", "c"], ["x", "y", "z"], [
        [0, 2, 4, 4, 4, 1],
        [2, 0, 2, 3, 4, 3],
        [4, 2, 0, 4, 5, 5],
        [4, 3, 4, 0, 5, 5],
        [4, 4, 5, 5, 0, 5],
        [1, 3, 5, 5, 5, 0],
    ])
    inst = Instance(m, (1, 1, 1), FaultTolerant(1, {"x": 1, "y": 1, "z": 1}))
    from ordmedian.oracle import ExactOptimum, _ft_guess
    opt = ExactOptimum(("a",), ("x", "y", "z"), F(8), {}, {}, [F(4), F(3), F(1)])
    g = _ft_guess(inst, opt, F(1), F(1))
    assert g.pos == (1, 2, 3)
    assert g.T_prime == {1: 4, 2: 4, 3: 0}
    assert g.T == {1: F(16, 3), 2: F(16, 3), 3: F(4, 3)}


def test_guess_stream_contains_correct_guess_and_caps():
    m = line([0, 6], [1, 4, 9])
    inst = Instance(m, (3, 2, 1), Robust(1, 3))
    opt = solve_exact(inst)
    eps = F(1)
    good = correct_guesses(inst, opt, eps).key()
    stream = enumerate_guesses(inst, eps)
    keys = [g.key() for g in stream]
    assert good in keys and not stream.truncated
    capped = enumerate_guesses(inst, eps, cap=1)
    assert len(list(capped)) == 1 and capped.truncated


def test_guess_stream_count_matches_stars_and_bars():
    from math import comb
    from ordmedian.costfn import slope_grid
    m = line([0, 6], [1, 4])
    inst = Instance(m, (5, 1), Robust(1, 2))
    eps = F(1, 2)
    wt = pad_weights(list(inst.w), eps)
    g = len(slope_grid(wt, eps))
    L = interval_count(eps, 2) + 2
    nd = len(m.distance_set(positive_only=True))
    assert len(list(enumerate_guesses(inst, eps))) == 1 + nd * comb(g + L - 1, L)


def test_huge_eps_collapses_slopes():
    m = line([0, 6], [1, 4])
    inst = Instance(m, (5, 1), Robust(1, 2))
    for g in enumerate_guesses(inst, F(5)):
        assert len(set(g.slopes)) == 1


def test_ft_stream_contains_correct_guess():
    m = line([0, 3, 7], [0, 2, 8])
    inst = Instance(m, (2, 1, 1), FaultTolerant(2, {"c0": 2, "c1": 1, "c2": 1}))
    opt = solve_ft_exact(inst)
    good = correct_guesses(inst, opt, F(1), F(1)).key()
    assert good in [g.key() for g in enumerate_guesses(inst, F(1), F(1))]


def test_reduced_instance_opt():
    m = line([0, 10], [0, 4, 10])
    inst = Instance(m, (1, 1), Robust(1, 2))
    assert reduced_instance_opt(inst, linear_cost(F(1)), 1) == 4
    f = CostFunction(F(10), F(1), 2, (F(4), F(2), F(1), F(1)))
    # F={f0}: d=(0,4), f(4)=4 (I3=[0,5]) ; F={f1}: d=(0,6), f(6)=12 -> 4
    assert reduced_instance_opt(inst, f, 1) == 4
    vals = [reduced_instance_opt(inst, f, lam) for lam in (1, F(1, 2), F(1, 10))]
    assert vals == sorted(vals, reverse=True)
