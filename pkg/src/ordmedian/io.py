"""JSON reading and writing for instances and solutions."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import (ExplicitMatroid, FaultTolerant, Instance, InstanceError, Knapsack,
                   MatroidVariant, MetricSpace, PartitionMatroid, Robust, Solution, fmt,
                   make_explicit_matroid, make_partition_matroid, q)


def instance_from_json(doc: dict, name: str = "") -> Instance:
    try:
        F = list(doc["facilities"])
        C = list(doc["clients"])
        dist = doc["dist"]
        w = [q(x) for x in doc["weights"]]
        var = doc["variant"]
    except KeyError as exc:
        raise InstanceError(f"instance JSON lacks key {exc}") from None
    if "matrix" in dist:
        metric = MetricSpace.from_matrix(F, C, dist["matrix"], dist.get("points"))
    elif "points_l1" in dist:
        metric = MetricSpace.from_points_l1(F, C, dist["points_l1"])
    else:
        raise InstanceError("dist needs 'matrix' or 'points_l1'")
    if len(var) != 1:
        raise InstanceError("variant must have exactly one key")
    (kind, body), = var.items()
    if kind == "robust":
        v = Robust(int(body["k"]), int(body["m"]))
    elif kind == "matroid":
        if "partition" in body:
            p = body["partition"]
            v = MatroidVariant(make_partition_matroid(F, p["parts"], p["capacities"]))
        elif "explicit" in body:
            v = MatroidVariant(make_explicit_matroid(F, body["explicit"]["independent_sets"]))
        else:
            raise InstanceError("matroid needs 'partition' or 'explicit'")
    elif kind == "knapsack":
        wt = body["wt"]
        if isinstance(wt, list):
            if len(wt) != len(F):
                raise InstanceError("one knapsack weight per facility")
            wt = dict(zip(F, wt))
        v = Knapsack({i: q(x) for i, x in wt.items()}, q(body["W"]))
    elif kind == "fault_tolerant":
        r = body["r"]
        if isinstance(r, list):
            if len(r) != len(C):
                raise InstanceError("one requirement per client")
            r = dict(zip(C, r))
        v = FaultTolerant(int(body["k"]), {j: int(x) for j, x in r.items()})
    else:
        raise InstanceError(f"unknown variant {kind!r}")
    return Instance(metric, tuple(w), v, name or doc.get("name", ""))


def instance_to_json(inst: Instance) -> dict:
    m = inst.metric
    doc = {
        "name": inst.name,
        "facilities": list(m.facility_ids),
        "clients": list(m.client_ids),
        "dist": {"matrix": [[fmt(x) for x in row] for row in m.matrix]},
        "weights": [fmt(x) for x in inst.w],
    }
    if list(m.points) != list(dict.fromkeys(m.facility_ids + m.client_ids)):
        doc["dist"]["points"] = list(m.points)
    v = inst.variant
    if isinstance(v, Robust):
        doc["variant"] = {"robust": {"k": v.k, "m": v.m}}
    elif isinstance(v, MatroidVariant):
        M = v.matroid
        if isinstance(M, PartitionMatroid):
            body = {"partition": {"parts": [list(p) for p in M.parts], "capacities": list(M.capacities)}}
        else:
            sets = sorted((sorted(s, key=str) for s in M.independent), key=lambda s: (len(s), s))
            body = {"explicit": {"independent_sets": sets}}
        doc["variant"] = {"matroid": body}
    elif isinstance(v, Knapsack):
        doc["variant"] = {"knapsack": {"wt": [fmt(v.wt[i]) for i in m.facility_ids], "W": fmt(v.W)}}
    else:
        doc["variant"] = {"fault_tolerant": {"k": v.k, "r": [v.r[j] for j in m.client_ids]}}
    return doc


def load_instance(path) -> Instance:
    path = Path(path)
    return instance_from_json(json.loads(path.read_text()), name=path.stem)


def save_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def solution_to_json(sol: Solution, cost: Fraction | None = None) -> dict:
    doc = {"open": list(sol.open)}
    if sol.served is not None:
        doc["served"] = list(sol.served)
    if sol.assignments is not None:
        doc["assignments"] = {str(j): list(v) for j, v in sol.assignments.items()}
    if cost is not None:
        doc["cost"] = fmt(cost)
    return doc


def jsonable(obj):
    """Recursively turn Fractions, tuples, sets and dataclass-like dicts into JSON values."""
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((jsonable(v) for v in obj), key=str)
    return obj
