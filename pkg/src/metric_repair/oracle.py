"""Exact reference solvers: exhaustive enumeration for tiny instances, and a 0/1
linear program for larger ones whose constraint is a conjunction of linear atoms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .constraints import And, Constraint, Everything, GeAtom, InclAtom, KeyAtom, LeAtom, ZeroOnly
from .core import COST_TOL, CapabilityError, Database, InputError, Repair, Weights, repair_cost
from .metric import Metric

CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleBudget:
    max_assignments: int = 5_000_000

    def __post_init__(self):
        if self.max_assignments < 1:
            raise ValueError("budget must be positive")


def search_space(db: Database, metric: Metric, weights: Weights, tau: float | None = None):
    """Movable cells (sorted by id) and, per cell, the admissible point indices with their costs."""
    cells = sorted(db.movable_cells(weights), key=lambda c: c.id)
    domains, costs = [], []
    for c in cells:
        row = metric.matrix[metric.index[c.value]]
        w = weights.of(c.attr)
        if tau is None:
            allowed = np.arange(len(metric.points))
        else:
            allowed = np.flatnonzero(row <= w * tau + COST_TOL)
        domains.append(allowed)
        costs.append(w * row[allowed])
    return cells, domains, costs


def brute_force_optimal(db: Database, metric: Metric, gamma: Constraint, weights: Weights,
                        tau: float | None = None, budget: OracleBudget | None = None) -> Repair | None:
    """Cheapest consistent assignment by full enumeration, or ``None`` if there is none.

    Cells are the digits of a mixed-radix counter (lowest id most significant,
    each digit running over admissible points in metric order), and the first
    assignment within 1e-9 of the minimum wins. With ``tau`` set, a cell only
    ranges over points within ``w * tau`` of its value.
    """
    budget = budget or OracleBudget()
    for c in db.cells:
        if c.value not in metric.index:
            raise InputError(f"cell {c.id!r} sits at {c.value!r}, which is not a metric point")
    sig = db.signature
    pts = metric.points
    cells, domains, costs = search_space(db, metric, weights, tau)
    radix = [len(d) for d in domains]
    total = math.prod(radix)
    if total > budget.max_assignments:
        raise CapabilityError(
            f"exhaustive search needs {total} assignments but the budget is "
            f"{budget.max_assignments}; rerun with a budget of at least {total}")

    dims = tuple(x + 1 for x in db.movable_counts(weights))
    strides = np.array([int(np.prod(dims[j + 1:])) for j in range(sig.q)], dtype=np.int64)
    attr_of = [sig.index(c.attr) for c in cells]
    legal = []
    reach = []
    for p, v in enumerate(pts):
        offset = db.locked_profile(weights, v)
        table = np.zeros(dims, dtype=bool)
        for t in np.ndindex(*dims):
            table[t] = gamma.allows(v, tuple(a + b for a, b in zip(t, offset)))
        legal.append(table.ravel())
        reach.append([k for k, d in enumerate(domains) if p in d])
    for p in range(len(pts)):
        if not reach[p] and not legal[p][0]:
            return None         # nothing can ever change this point's profile

    place = [math.prod(radix[k + 1:]) for k in range(len(cells))]
    best_cost = math.inf
    best_idx = -1
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        chosen = []
        cost = np.zeros(idx.shape)
        for k in range(len(cells)):
            digit = (idx // place[k]) % radix[k]
            chosen.append(domains[k][digit])
            cost += costs[k][digit]
        ok = np.ones(idx.shape, dtype=bool)
        for p in range(len(pts)):
            if not reach[p]:
                continue
            flat = np.zeros(idx.shape, dtype=np.int64)
            for k in reach[p]:
                flat += (chosen[k] == p) * strides[attr_of[k]]
            ok &= legal[p][flat]
        if not ok.any():
            continue
        masked = np.where(ok, cost, np.inf)
        m = float(masked.min())
        if m < best_cost - COST_TOL:
            first = int(np.flatnonzero(masked <= m + COST_TOL)[0])
            best_cost, best_idx = m, int(idx[first])

    if best_idx < 0:
        return None
    assignment = {c.id: c.value for c in db.locked_cells(weights)}
    for k, c in enumerate(cells):
        assignment[c.id] = pts[int(domains[k][(best_idx // place[k]) % radix[k]])]
    return Repair(assignment, repair_cost(db, assignment, metric, weights),
                  {"assignments": total, "index": best_idx})


def _linear_atoms(expr) -> list:
    """Flatten a conjunction of linear atoms; anything else cannot be encoded."""
    if isinstance(expr, And):
        out = []
        for t in expr.terms:
            out += _linear_atoms(t)
        return out
    if isinstance(expr, (KeyAtom, LeAtom, GeAtom, InclAtom, Everything, ZeroOnly)):
        return [expr]
    raise CapabilityError(f"{type(expr).__name__} is not a conjunction of linear atoms")


def milp_optimal(db: Database, metric: Metric, gamma: Constraint, weights: Weights,
                 tau: float | None = None) -> Repair | None:
    """Exact optimum as a 0/1 program, for constraints built from key, inclusion, le and ge atoms.

    Inclusion ``A_l -> A_j`` becomes ``count_l <= n_l * count_j``, which is exact
    for integer counts. Scales to instances far beyond exhaustive search.
    """
    sig = db.signature
    pts = metric.points
    cells, domains, costs = search_space(db, metric, weights, tau)
    var = []                                    # (cell index, point index)
    c_obj = []
    for k, (dom, cst) in enumerate(zip(domains, costs)):
        for p, w in zip(dom, cst):
            var.append((k, int(p)))
            c_obj.append(float(w))
    nvar = len(var)
    n_mov = db.movable_counts(weights)
    rows, lo, hi = [], [], []

    def add(coef: dict, lb: float, ub: float):
        row = np.zeros(nvar)
        for i, a in coef.items():
            row[i] += a
        rows.append(row)
        lo.append(lb)
        hi.append(ub)

    for k in range(len(cells)):
        add({i: 1.0 for i, (kk, _) in enumerate(var) if kk == k}, 1, 1)
    at_point: dict = {}
    for i, (k, p) in enumerate(var):
        at_point.setdefault(p, []).append(i)
    for p, v in enumerate(pts):
        off = db.locked_profile(weights, v)
        members = at_point.get(p, [])

        def count(j):           # 0-based attribute j at this point
            return {i: 1.0 for i in members if sig.index(cells[var[i][0]].attr) == j}

        for atom in _linear_atoms(gamma.at(v)):
            if isinstance(atom, Everything):
                continue
            if isinstance(atom, ZeroOnly):
                for j in range(sig.q):
                    add(count(j), -np.inf, -off[j])
                continue
            if isinstance(atom, (KeyAtom, LeAtom)):
                j = atom.j - 1
                cap = 1 if isinstance(atom, KeyAtom) else atom.k
                add(count(j), -np.inf, cap - off[j])
            elif isinstance(atom, GeAtom):
                j = atom.j - 1
                add(count(j), atom.k - off[j], np.inf)
            else:
                l, j = atom.l - 1, atom.j - 1
                big = n_mov[l] + off[l]
                coef = count(l)
                for i, a in count(j).items():
                    coef[i] = coef.get(i, 0.0) - big * a
                add(coef, -np.inf, big * off[j] - off[l])
    if nvar == 0:
        ok = all(gamma.allows(v, db.locked_profile(weights, v)) for v in pts)
        return Repair({c.id: c.value for c in db.cells}, 0.0) if ok else None
    A = np.array(rows) if rows else np.zeros((0, nvar))
    res = milp(np.array(c_obj), constraints=LinearConstraint(A, lo, hi) if rows else None,
               integrality=np.ones(nvar), bounds=Bounds(0, 1), options={"mip_rel_gap": 0})
    if res.status == 2:
        return None
    if not res.success:
        raise RuntimeError(f"MILP solver failed: {res.message}")
    assignment = {c.id: c.value for c in db.locked_cells(weights)}
    for i, (k, p) in enumerate(var):
        if res.x[i] > 0.5:
            assignment[cells[k].id] = pts[p]
    return Repair(assignment, repair_cost(db, assignment, metric, weights), {"solver": "milp"})
