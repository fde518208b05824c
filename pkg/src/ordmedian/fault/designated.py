"""Fixed fractional points that exercise every branch of the stochastic rounding.

Random corpora almost never produce dangerous clients, so these hand-built
cases (instance plus a feasible (x, y)) carry the laminar-ball checks.
"""
from __future__ import annotations

from fractions import Fraction as Fr

from ..core import FaultTolerant, Instance, MetricSpace


def _line(fac: dict, cli: dict, w, k: int, r: dict, name: str) -> Instance:
    ids = list(fac) + list(cli)
    pos = {**fac, **cli}
    metric = MetricSpace.from_points_l1(list(fac), list(cli), [(pos[p], 0) for p in ids])
    return Instance(metric, tuple(Fr(a) for a in w), FaultTolerant(k, r), name)


def _nearest_x(inst: Instance, y: dict) -> dict:
    from .split import nearest_volume
    x = {}
    for j in inst.clients:
        for i, a in nearest_volume(inst, y, j).items():
            x[(i, j)] = a
    return x


def one_dangerous():
    inst = _line({"f0": 0, "f1": 100}, {"c0": 0}, [1], 1, {"c0": 1}, "one-dangerous")
    y = {"f0": Fr(99, 100), "f1": Fr(1, 100)}
    return inst, _nearest_x(inst, y), y


def two_far_dangerous():
    inst = _line({"f0": 0, "f1": 100, "f2": 1000, "f3": 1100}, {"c0": 0, "c1": 1000}, [2, 1], 2,
                 {"c0": 1, "c1": 1}, "two-far-dangerous")
    y = {"f0": Fr(99, 100), "f1": Fr(1, 100), "f2": Fr(99, 100), "f3": Fr(1, 100)}
    return inst, _nearest_x(inst, y), y


def nested_pair():
    """A requirement-1 and a requirement-2 client at the same point; the larger
    merged ball swallows the smaller one."""
    inst = _line({"fa": 0, "fb": 1, "fe": 1000}, {"c0": 0, "c1": 0}, [1, 1], 2,
                 {"c0": 1, "c1": 2}, "nested-pair")
    y = {"fa": Fr(99, 100), "fb": Fr(1), "fe": Fr(1, 100)}
    return inst, _nearest_x(inst, y), y


def colocated_conflict():
    inst = _line({"fa": 0, "fb": 100}, {"c0": 0, "c1": 0}, [1, 1], 1, {"c0": 1, "c1": 1},
                 "colocated-conflict")
    y = {"fa": Fr(99, 100), "fb": Fr(1, 100)}
    return inst, _nearest_x(inst, y), y


def half_bundle():
    inst = _line({"f0": 1, "f1": 2}, {"c0": 0}, [1], 1, {"c0": 1}, "half-bundle")
    y = {"f0": Fr(1, 2), "f1": Fr(1, 2)}
    return inst, _nearest_x(inst, y), y


def corpus_point():
    """LP optimum of a generated Top-ell instance whose rounding splits into many copies."""
    from ..gen import gen_instances
    from ..oracle import correct_guesses, solve_exact
    from .lp import build_ft_lp
    inst = gen_instances(4, 6, 8, "fault_tolerant", seed=2, top_ell=True)[3]
    g = correct_guesses(inst, solve_exact(inst), Fr(1, 4))
    x, y, _, _ = build_ft_lp(inst, g).solve()
    return inst, x, y


def designated_cases() -> list:
    """(name, instance, x, y) for the marginal tests."""
    out = []
    for make in (one_dangerous, two_far_dangerous, nested_pair, colocated_conflict, corpus_point):
        inst, x, y = make()
        out.append((inst.name, inst, x, y))
    return out
