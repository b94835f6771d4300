"""Approximate repairs on general metrics: best of several sampled-tree solves.

Also the route for infinite metrics, which restricts to the values already
present in the database (non-inventive repairs) at a loss of at most factor 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable

import numpy as np

from .constraints import Constraint, closed_under_addition
from .core import COST_TOL, CapabilityError, Database, Repair, Weights, _dist_fn, repair_cost
from .embed import sample_frt_tree
from .metric import Metric
from .tree_solver import solve_tree


@dataclass(frozen=True)
class ApproxConfig:
    epsilon: float = 0.01
    trials: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def n_trials(self) -> int:
        """``ceil(log2(1/epsilon))`` unless overridden."""
        if self.trials is not None:
            return self.trials
        return max(1, math.ceil(math.log2(1.0 / self.epsilon) - 1e-12))

    def trial_seeds(self) -> list[np.random.SeedSequence]:
        # SeedSequence.spawn gives the same children whatever order they are consumed in
        return np.random.SeedSequence(self.seed).spawn(self.n_trials)


def repair_general(db: Database, metric: Metric, gamma: Constraint, weights: Weights,
                   cfg: ApproxConfig | None = None) -> Repair | None:
    """Best repair found by solving exactly on ``cfg.n_trials`` random dominating trees.

    Each candidate is scored under the original metric. Ties keep the earliest
    trial. ``None`` means no repair exists; that is decided by the first trial
    since feasibility does not depend on distances.
    """
    cfg = cfg or ApproxConfig()
    best: Repair | None = None
    best_trial = -1
    per_trial = []
    for k, seed in enumerate(cfg.trial_seeds()):
        emb = sample_frt_tree(metric, seed)
        rep = solve_tree(db, emb.tree, gamma.with_overrides(emb.overrides), weights)
        if rep is None:
            return None
        cost = repair_cost(db, rep, metric, weights)
        if cost > rep.cost + 1e-9 * max(1.0, rep.cost):
            raise AssertionError(f"trial {k}: metric cost {cost} exceeds tree cost {rep.cost}")
        per_trial.append({"trial": k, "cost": cost, "tree_cost": rep.cost, "levels": emb.levels})
        if best is None or cost < best.cost - COST_TOL:
            best, best_trial = Repair(rep.assignment, cost), k
    return Repair(best.assignment, best.cost,
                  {"trials": cfg.n_trials, "best_trial": best_trial, "per_trial": per_trial,
                   "seed": cfg.seed})


def _require_additive(db: Database, gamma: Constraint) -> None:
    if not gamma.uniform:
        raise CapabilityError("the non-inventive reduction needs a uniform constraint")
    q = db.signature.q
    if not gamma.default.holds((0,) * q):
        raise CapabilityError("the non-inventive reduction needs the zero profile to be allowed")
    if not closed_under_addition(gamma.default, db.counts()):
        raise CapabilityError(
            "constraint is not closed under addition (bounded check up to the cell counts); "
            "a repair may need values outside the database, so this reduction does not apply")


def make_non_inventive(db: Database, e0: Repair, dist, gamma: Constraint,
                       weights: Weights | None = None) -> Repair:
    """Pull every invented value back into ``Vals(db)``.

    All cells that ``e0`` puts on a value ``v`` not in the database move together
    to the original value of the cell closest to ``v``. Grouping is kept, so the
    result stays consistent when the constraint is closed under addition, and by
    the triangle inequality the cost at most doubles.
    """
    _require_additive(db, gamma)
    d = _dist_fn(dist)
    original = set(db.values())
    invented: list = []
    members: dict = {}
    for c in db.cells:
        v = e0.assignment[c.id]
        if v in original:
            continue
        if v not in members:
            invented.append(v)
            members[v] = []
        members[v].append(c)
    assignment = dict(e0.assignment)
    replaced = {}
    for v in invented:
        group = members[v]
        # min keeps the first of equally close cells, i.e. database order
        anchor = min(group, key=lambda c: d(c.value, v))
        replaced[v] = anchor.value
        for c in group:
            assignment[c.id] = anchor.value
    if weights is None:
        weights = Weights.uniform(db.signature)
    cost = repair_cost(db, assignment, d, weights)
    return Repair(assignment, cost, {"replaced": replaced})


def repair_infinite(db: Database, dist: Callable[[Hashable, Hashable], float], gamma: Constraint,
                    weights: Weights, cfg: ApproxConfig | None = None) -> Repair | None:
    """Approximate repair over an unbounded space given only a distance callback.

    Only ``Vals(db)`` is materialized; some optimal repair within those values
    costs at most twice the true optimum.
    """
    _require_additive(db, gamma)
    vals = db.values()
    mat = np.array([[0.0 if a == b else float(dist(a, b)) for b in vals] for a in vals])
    metric = Metric(tuple(vals), mat, "matrix")
    rep = repair_general(db, metric, gamma, weights, cfg)
    if rep is None:
        return None
    return Repair(rep.assignment, rep.cost, {**rep.info, "points": len(vals)})
