"""Command-line entry point: ``metric-repair {validate,repair,oracle,embed-stats,gen}``.

Exit codes: 0 repaired or valid, 1 no repair exists, 2 invalid input,
3 the requested solver refuses the instance.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Sequence

from .approx import ApproxConfig, repair_general
from .bounded import solve_bounded_line
from .core import CapabilityError, InputError, RepairError, check_consistency, validate_instance, within_bound
from .embed import stretch_statistics
from .gen import (RandomSpec, gen_apx_3sc, gen_random, gen_sat_bounded, gen_x3c_bounded, nurse_instance,
                  pid_instance)
from .io import dumps, load_instance, repair_doc
from .oracle import OracleBudget, brute_force_optimal
from .tree_solver import solve_tree_metric

EXIT_OK, EXIT_NO_REPAIR, EXIT_INVALID, EXIT_REFUSED = 0, 1, 2, 3
TREE_KINDS = ("tree", "line", "discrete")


def _emit(doc: dict, args) -> None:
    sys.stdout.write(dumps(doc, pretty=getattr(args, "pretty", False)) + "\n")


def _error(message: str, status: str = "error") -> dict:
    return {"status": status, "message": message}


def _finish(doc: dict, inst, args, t0: float) -> int:
    doc["seed"] = args.seed
    doc["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    if doc["status"] == "repaired":
        db2 = inst.db.apply(doc["assignment"])
        bad = check_consistency(db2, inst.constraint, inst.metric.points)
        if bad:
            raise AssertionError(f"solver returned an inconsistent repair (violations at {bad})")
        if inst.tau is not None and not within_bound(inst.db, doc["assignment"], inst.metric, inst.weights, inst.tau):
            raise AssertionError("solver returned a repair that breaks the movement bound")
    _emit(doc, args)
    return EXIT_OK if doc["status"] == "repaired" else EXIT_NO_REPAIR


def cmd_validate(args) -> int:
    inst = load_instance(args.file)
    report = validate_instance(inst)
    doc = report.to_dict()
    doc["violating_points"] = [str(v) for v in check_consistency(inst.db, inst.constraint, inst.metric.points)]
    doc["consistent"] = not doc["violating_points"]
    _emit(doc, args)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_repair(args) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.file)
    kind = inst.metric.kind
    extra: dict = {}
    if inst.tau is not None:
        if kind == "line":
            solver = "bounded_line_dp"
            rep = solve_bounded_line(inst.db, inst.metric, inst.constraint, inst.weights, inst.tau)
        else:
            # bounded repair on a general metric is NP-hard; only tiny instances are decided, exhaustively
            solver = "bounded_oracle"
            try:
                rep = brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights, inst.tau,
                                          OracleBudget(args.budget))
            except CapabilityError as e:
                raise CapabilityError(
                    f"bounded repair on a {kind} metric is only exact for tiny instances: {e}") from None
    elif kind in TREE_KINDS:
        solver = "tree_exact"
        rep = solve_tree_metric(inst.db, inst.metric, inst.constraint, inst.weights)
    else:
        solver = "frt_approx"
        cfg = ApproxConfig(args.epsilon, args.trials, args.seed)
        rep = repair_general(inst.db, inst.metric, inst.constraint, inst.weights, cfg)
        extra["trials"] = cfg.n_trials
        if rep is not None:
            extra["diagnostics"] = {"per_trial": rep.info["per_trial"], "best_trial": rep.info["best_trial"]}
    return _finish(repair_doc(inst.db, rep, solver, **extra), inst, args, t0)


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    inst = load_instance(args.file)
    rep = brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights, inst.tau,
                              OracleBudget(args.budget))
    extra = {"assignments": rep.info["assignments"]} if rep is not None else {}
    return _finish(repair_doc(inst.db, rep, "oracle", **extra), inst, args, t0)


def cmd_embed_stats(args) -> int:
    inst = load_instance(args.file)
    rep = stretch_statistics(inst.metric, args.samples, args.seed)
    doc = {"status": "ok", "points": len(inst.metric.points), "seed": args.seed, **rep.to_dict()}
    _emit(doc, args)
    return EXIT_OK


def _parse_sets(text: str) -> dict:
    sets = {}
    for i, chunk in enumerate(t for t in text.split(";") if t.strip()):
        name, _, members = chunk.partition(":") if ":" in chunk else (f"s{i + 1}", "", chunk)
        sets[name.strip()] = tuple(m for m in members.replace(",", " ").split())
    return sets


def _parse_cnf(text: str) -> list[list[int]]:
    try:
        return [[int(x) for x in c.replace(",", " ").split()] for c in text.split(";") if c.strip()]
    except ValueError:
        raise InputError(f"bad CNF {text!r}; use e.g. '1,2,-3;-1,2'") from None


def cmd_gen(args) -> int:
    kind = args.kind
    try:
        if kind == "random":
            cells = tuple(int(x) for x in args.cells.split(","))
            locked = tuple(int(x) for x in args.locked.split(",")) if args.locked else ()
            doc = gen_random(RandomSpec(args.points, cells, args.metric, args.template,
                                        (args.wmin, args.wmax), locked, args.override_prob, args.tau,
                                        args.seed))
        elif kind == "apx3sc":
            doc = gen_apx_3sc(args.X.split(","), _parse_sets(args.S))
        elif kind == "x3c":
            doc = gen_x3c_bounded(args.X.split(","), _parse_sets(args.S))
        elif kind == "sat":
            doc = gen_sat_bounded(_parse_cnf(args.cnf))
        elif kind == "pid":
            doc = pid_instance(args.metric)
        else:
            doc = nurse_instance(args.metric)
    except ValueError as e:
        raise InputError(str(e)) from None
    _emit(doc, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--pretty", action="store_true", help="indent the JSON output")

    p = argparse.ArgumentParser(prog="metric-repair", description="Minimum-cost repair of metric databases.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check an instance file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("repair", parents=[common], help="repair an instance with the fitting solver")
    s.add_argument("file")
    s.add_argument("--epsilon", type=float, default=0.01, help="failure probability of the randomized solver")
    s.add_argument("--trials", type=int, default=None, help="override the number of sampled trees")
    s.add_argument("--budget", type=int, default=OracleBudget().max_assignments,
                   help="enumeration cap for bounded repairs on non-line metrics")
    s.set_defaults(func=cmd_repair)

    s = sub.add_parser("oracle", parents=[common], help="exhaustive optimum for tiny instances")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=OracleBudget().max_assignments)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("embed-stats", parents=[common], help="stretch of sampled tree embeddings")
    s.add_argument("file")
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_embed_stats)

    s = sub.add_parser("gen", parents=[common], help="write a generated instance to stdout")
    s.add_argument("kind", choices=["random", "apx3sc", "x3c", "sat", "pid", "nurse"])
    s.add_argument("--points", type=int, default=4)
    s.add_argument("--cells", default="2,2", help="cells per attribute, e.g. 2,3")
    s.add_argument("--metric", default=None, help="random: line|discrete|tree|matrix|graph; pid/nurse: discrete|hamming")
    s.add_argument("--template", default="inclusion")
    s.add_argument("--wmin", type=float, default=1.0)
    s.add_argument("--wmax", type=float, default=1.0)
    s.add_argument("--locked", default="", help="1-based attributes to lock, e.g. 1")
    s.add_argument("--override-prob", type=float, default=0.0)
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--X", default="x1,x2,x3,x4,x5,x6", help="elements, comma separated")
    s.add_argument("--S", default="s1:x1,x2,x3;s2:x3,x4,x5;s3:x4,x5,x6",
                   help="sets as name:a,b,c separated by ';'")
    s.add_argument("--cnf", default="1,2,3;-2,3,4;-2,-3,-4", help="clauses separated by ';'")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and args.metric is None:
        args.metric = "line" if args.kind == "random" else "discrete"
    try:
        return args.func(args)
    except InputError as e:
        _emit(_error(str(e)), args)
        return EXIT_INVALID
    except CapabilityError as e:
        _emit(_error(str(e), "refused"), args)
        return EXIT_REFUSED
    except RepairError as e:
        _emit(_error(str(e)), args)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
