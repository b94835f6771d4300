"""Gadget instances behind the hardness results, decided exactly and compared with their source problems.

Run: python3 demos/hardness.py
"""

import itertools

from metric_repair import (brute_force_optimal, gen_apx_3sc, gen_sat_bounded, gen_x3c_bounded, instance_from_dict,
                           milp_optimal)
from metric_repair.gen import APX_SETS, SAT_CNF, X3C_SETS, X6


def decide(doc):
    inst = instance_from_dict(doc)
    return brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights, inst.tau)


def main():
    print("exact cover: each element cell may move one edge; groups must have size 0 or 3")
    for drop in (None, "s2", "s3"):
        S = {k: v for k, v in X3C_SETS.items() if k != drop}
        rep = decide(gen_x3c_bounded(X6, S))
        where = sorted({rep.assignment[c] for c in rep.assignment}) if rep else None
        print(f"  sets {sorted(S)}: {'cover via ' + str(where) if rep else 'no bounded repair'}")

    print("\nSAT: clause cells must reach a literal point that its variable cell also reaches")
    rep = decide(gen_sat_bounded(SAT_CNF))
    truth = {k[2:]: rep.assignment[k][len(k) - 2:] or "either" for k in rep.assignment if k.startswith("b_")}
    print(f"  {SAT_CNF}: satisfiable, assignment {truth}")
    rep = decide(gen_sat_bounded([[1, 2], [-1], [-2]]))
    print(f"  [[1, 2], [-1], [-2]]: {'satisfiable' if rep else 'unsatisfiable'}")

    print("\nset cover: optimal repair cost = |X| + size of the smallest cover")
    inst = instance_from_dict(gen_apx_3sc(X6, APX_SETS))
    rep = milp_optimal(inst.db, inst.metric, inst.constraint, inst.weights)
    cover = next(r for r in range(len(APX_SETS) + 1) for pick in itertools.combinations(APX_SETS, r)
                 if set().union(*(APX_SETS[s] for s in pick)) >= set(X6))
    used = sorted({rep.assignment[c] for c in rep.assignment if c.startswith("a_")})
    print(f"  repair cost {rep.cost:g} = {len(X6)} + {cover}; cover used: {used}")


if __name__ == "__main__":
    main()
