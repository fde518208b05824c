"""Command line: gen, solve, oracle, bench, check."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import RunSettings, bench, check_one, format_summary, solve_instance, summarize, write_csv
from .core import InstanceError, q
from .gen import VARIANTS, gen_instances, write_corpus
from .io import jsonable, load_instance, save_json, solution_to_json
from .oracle import solve_exact


def _frac(text):
    try:
        return q(text)
    except Exception:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _instance_paths(items) -> list[Path]:
    out = []
    for it in items:
        p = Path(it)
        out.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    return out


def _settings(a) -> RunSettings:
    return RunSettings(mode=a.mode, cap=a.cap, samples=a.samples, seed=a.seed, eps=a.eps, delta=a.delta,
                       rho=a.rho, tau=a.tau, lam=a.lam)


def _pipeline_flags(p):
    p.add_argument("--mode", choices=("oracle", "enumerate"), default="oracle")
    p.add_argument("--cap", type=int, default=100_000, help="candidate cap in enumerate mode")
    p.add_argument("--samples", type=int, default=200, help="roundings per fault-tolerant run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=_frac)
    p.add_argument("--delta", type=_frac)
    p.add_argument("--rho", type=_frac)
    p.add_argument("--tau", type=_frac)
    p.add_argument("--lambda", dest="lam", type=_frac)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ordmedian", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write random grid instances")
    g.add_argument("--variant", choices=VARIANTS, required=True)
    g.add_argument("--count", type=int, default=50)
    g.add_argument("--facilities", type=int, default=6)
    g.add_argument("--clients", type=int, default=8)
    g.add_argument("--grid", type=int, default=100)
    g.add_argument("--k-max", type=int, default=3)
    g.add_argument("--r-max", type=int, default=2)
    g.add_argument("--top-ell", action="store_true", help="Top-ell weight vectors")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("solve", help="run the pipeline on one instance")
    s.add_argument("instance")
    _pipeline_flags(s)
    s.add_argument("--out", help="solution JSON")
    s.add_argument("--trace", help="run trace JSON")

    o = sub.add_parser("oracle", help="brute-force optimum of one instance")
    o.add_argument("instance")
    o.add_argument("--out")

    b = sub.add_parser("bench", help="oracle plus pipeline over a corpus")
    b.add_argument("instances", nargs="+", help="instance files or directories")
    _pipeline_flags(b)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", help="CSV of bench records")
    b.add_argument("--trace", help="JSON with the summary and every run trace")

    c = sub.add_parser("check", help="invariant sweep without the bound comparison")
    c.add_argument("instances", nargs="+")
    _pipeline_flags(c)
    return ap


def cmd_gen(a) -> int:
    kw = {"k_max": a.k_max, "top_ell": a.top_ell}
    if a.variant == "fault_tolerant":
        kw["r_max"] = a.r_max
    insts = gen_instances(a.count, a.facilities, a.clients, a.variant, a.grid, a.seed, **kw)
    paths = write_corpus(insts, a.out)
    print(f"wrote {len(paths)} instances to {a.out}")
    return 0


def cmd_solve(a) -> int:
    inst = load_instance(a.instance)
    rep = solve_instance(inst, _settings(a))
    doc = solution_to_json(rep.solution, rep.cost)
    if a.out:
        save_json(doc, a.out)
    if a.trace:
        save_json(jsonable(rep.trace()), a.trace)
    bad = [k for k, ok in rep.checks.items() if not ok and k != "lemma3_clean"]
    print(f"{inst.name}: cost {float(rep.cost):.6g}, open {list(rep.solution.open)}"
          + (f", failed checks {bad}" if bad else ""))
    return 1 if bad else 0


def cmd_oracle(a) -> int:
    inst = load_instance(a.instance)
    opt = solve_exact(inst)
    doc = {"opt": opt.opt_value, "open": list(opt.open), "served": list(opt.served),
           "assignment": opt.assignment, "costs": opt.costs, "xi": opt.xi}
    if a.out:
        save_json(jsonable(doc), a.out)
    print(f"{inst.name}: opt {float(opt.opt_value):.6g}, open {list(opt.open)}")
    return 0


def cmd_bench(a) -> int:
    insts = [load_instance(p) for p in _instance_paths(a.instances)]
    recs = bench(insts, _settings(a), a.workers)
    summary = summarize(recs)
    if a.out:
        write_csv(recs, a.out)
    if a.trace:
        save_json(jsonable({"summary": summary,
                            "runs": [dict(r.row(), trace=r.report.trace() if r.report else None) for r in recs]}),
                  a.trace)
    print(format_summary(summary))
    for r in recs:
        if r.failed:
            print(f"FAIL {r.instance_id}: {';'.join(r.flags)}")
    return 1 if any(r.failed for r in recs) else 0


def cmd_check(a) -> int:
    bad = 0
    for p in _instance_paths(a.instances):
        try:
            inst = load_instance(p)
            problems = check_one(inst, _settings(a))
        except (InstanceError, ValueError, KeyError, json.JSONDecodeError) as exc:
            problems = [f"load: {exc}"]
        status = "ok" if not problems else "FAIL"
        print(f"{status} {p.name}" + ("".join(f"\n  {x}" for x in problems)))
        bad += bool(problems)
    return 1 if bad else 0


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return {"gen": cmd_gen, "solve": cmd_solve, "oracle": cmd_oracle, "bench": cmd_bench,
                "check": cmd_check}[a.cmd](a)
    except (InstanceError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
