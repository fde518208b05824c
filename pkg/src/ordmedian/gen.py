"""Random desk-scale instances on an integer grid with the L1 metric.

Integer L1 distances are exact and every non-co-located pair is at distance
at least 1, so the generated instances are valid for every pipeline.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

from .core import (FaultTolerant, Instance, InstanceError, Knapsack, MatroidVariant, MetricSpace,
                   Robust, make_explicit_matroid, make_partition_matroid)
from .io import instance_to_json, save_json

VARIANTS = ("robust", "matroid", "knapsack", "fault_tolerant")


def random_weights(rng: random.Random, n: int, top_ell: int | None = None) -> tuple:
    if top_ell is not None:
        return tuple(Fraction(1) if a < top_ell else Fraction(0) for a in range(n))
    w = sorted((Fraction(rng.randint(0, 6), rng.choice((1, 2))) for _ in range(n)), reverse=True)
    if w[0] == 0:
        w[0] = Fraction(1)
    return tuple(w)


def random_instance(rng: random.Random, variant: str, n_facilities: int, n_clients: int,
                    grid: int = 100, k_max: int = 3, r_max: int = 2, top_ell: bool = False,
                    name: str = "") -> Instance:
    if variant not in VARIANTS:
        raise InstanceError(f"unknown variant {variant!r}")
    if n_facilities < 1 or n_clients < 1:
        raise InstanceError("need at least one facility and one client")
    fac = [f"f{a}" for a in range(n_facilities)]
    cli = [f"c{b}" for b in range(n_clients)]
    pts = [(rng.randint(0, grid), rng.randint(0, grid)) for _ in range(n_facilities + n_clients)]
    metric = MetricSpace.from_points_l1(fac, cli, pts)
    kk = min(k_max, n_facilities)
    if variant == "robust":
        k = rng.randint(1, kk)
        m = rng.randint(1, n_clients)
        ell = rng.randint(1, m) if top_ell else None
        return Instance(metric, random_weights(rng, m, ell), Robust(k, m), name)
    ell = rng.randint(1, n_clients) if top_ell else None
    w = random_weights(rng, n_clients, ell)
    if variant == "matroid":
        if rng.random() < 0.7 or n_facilities > 6:
            cut = rng.randint(1, n_facilities)
            parts = [fac[:cut], fac[cut:]] if cut < n_facilities else [fac]
            caps = [rng.randint(1, max(1, min(2, len(p)))) for p in parts]
            M = make_partition_matroid(fac, parts, caps)
        else:
            r = rng.randint(1, kk)
            M = make_explicit_matroid(fac, [s for t in range(r + 1) for s in itertools.combinations(fac, t)])
        return Instance(metric, w, MatroidVariant(M), name)
    if variant == "knapsack":
        wt = {i: Fraction(rng.randint(1, 6)) for i in fac}
        W = Fraction(rng.randint(int(max(wt.values())), max(int(max(wt.values())), int(sum(wt.values())) // 2)))
        return Instance(metric, w, Knapsack(wt, W), name)
    if kk < 1:
        raise InstanceError("k must be at least 1")
    k = rng.randint(1, kk)
    r = {j: rng.randint(1, min(r_max, k)) for j in cli}
    return Instance(metric, w, FaultTolerant(k, r), name)


def gen_instances(count: int, n_facilities: int, n_clients: int, variant: str, grid: int = 100,
                  seed: int = 0, **kw) -> list[Instance]:
    """``count`` instances; the same arguments always give the same list."""
    rng = random.Random(f"{seed}:{variant}:{n_facilities}:{n_clients}:{grid}")
    return [random_instance(rng, variant, n_facilities, n_clients, grid, name=f"{variant}-{seed}-{t:03d}", **kw)
            for t in range(count)]


def write_corpus(instances, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for inst in instances:
        p = out / f"{inst.name}.json"
        save_json(instance_to_json(inst), p)
        paths.append(p)
    return paths
