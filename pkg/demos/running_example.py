"""Walk through the clinic example: person ids under two metrics, then nurse ids with shot caps.

Run: python3 demos/running_example.py
"""

from metric_repair import (ApproxConfig, brute_force_optimal, check_consistency, instance_from_dict, milp_optimal,
                           nurse_instance, pid_instance, repair_general, solve_tree_metric)


def show(title, inst, rep):
    print(f"\n{title}")
    if rep is None:
        print("  no repair exists")
        return
    for cid in rep.changed_cells(inst.db):
        print(f"  {cid}: {inst.db.cell(cid).value} -> {rep.assignment[cid]}")
    print(f"  cost {rep.cost:.4g}")


def main():
    inst = instance_from_dict(pid_instance("discrete"))
    print("violating points before repair:", check_consistency(inst.db, inst.constraint, inst.metric.points))
    show("person ids, discrete metric: exact tree solver on the star cast", inst,
         solve_tree_metric(inst.db, inst.metric, inst.constraint, inst.weights))

    inst = instance_from_dict(pid_instance("hamming"))
    show("person ids, Hamming metric: exhaustive oracle", inst,
         brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights))
    show("person ids, Hamming metric: 0/1 program (independent check)", inst,
         milp_optimal(inst.db, inst.metric, inst.constraint, inst.weights))
    rep = repair_general(inst.db, inst.metric, inst.constraint, inst.weights, ApproxConfig(0.01, seed=7))
    show("person ids, Hamming metric: best of 7 sampled trees (seed 7)", inst, rep)
    print("  per-trial costs:", [t["cost"] for t in rep.info["per_trial"]])

    for kind in ("discrete", "hamming"):
        inst = instance_from_dict(nurse_instance(kind))
        show(f"nurse ids, {kind} metric: 078 may give 5 shots, 017 only 1", inst,
             brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights))


if __name__ == "__main__":
    main()
