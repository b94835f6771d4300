"""How far sampled-tree repairs land from the optimum on random general metrics, and tree stretch.

Run: python3 demos/approximation.py
"""

import math

import numpy as np

from metric_repair import (ApproxConfig, RandomSpec, brute_force_optimal, gen_random, instance_from_dict,
                           repair_general, stretch_statistics)


def main(n_instances: int = 40):
    ratios = {1: [], 3: [], 7: []}
    for seed in range(n_instances):
        inst = instance_from_dict(gen_random(RandomSpec(8, (3, 2), "matrix", "inclusion", (0.5, 2.0), seed=seed)))
        opt = brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights).cost
        for k in ratios:
            rep = repair_general(inst.db, inst.metric, inst.constraint, inst.weights, ApproxConfig(trials=k, seed=seed))
            ratios[k].append(rep.cost / opt if opt > 0 else 1.0)
        if seed == 0:
            st = stretch_statistics(inst.metric, 200, 0)
            print(f"stretch on an 8-point metric over 200 trees: mean {st.mean:.2f}, "
                  f"worst {st.max:.2f}, log2|M| = {math.log2(8):.0f}")
    print(f"\ncost / optimum over {n_instances} instances (8 points, 5 movable cells)")
    for k, r in ratios.items():
        r = np.array(r)
        print(f"  {k} trial(s): mean {r.mean():.3f}  worst {r.max():.3f}  optimal in {np.mean(r < 1 + 1e-9):.0%}")


if __name__ == "__main__":
    main()
