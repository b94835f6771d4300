"""Optimal repairs on the line when every cell may move at most ``w * tau``.

Points are visited left to right. The state is a prefix vector ``l``: the
``l_j`` leftmost movable cells of each attribute (ordered by value, then id)
have already been placed. ``V[r][l]`` is the least cost of placing that prefix
on the first ``r`` points; the last point takes a per-attribute suffix of the
prefix, which must be within the bound and whose profile must be allowed there.
"""

from __future__ import annotations

import math
from typing import Hashable, Iterable, Sequence

import numpy as np

from .constraints import Constraint, closed_under_addition
from .core import COST_TOL, CapabilityError, Cell, Database, InputError, Repair, Signature, Weights, repair_cost
from .metric import Metric

INF = np.inf


def contracted_satisfies(cells: Iterable[Cell], gamma: Constraint, v: Hashable, signature: Signature,
                         offset: Sequence[int] | None = None) -> bool:
    """Whether all of ``cells`` may sit together at ``v`` (on top of ``offset``, e.g. locked cells)."""
    p = list(offset) if offset is not None else [0] * signature.q
    for c in cells:
        p[signature.index(c.attr)] += 1
    return gamma.allows(v, tuple(p))


def _line_points(line) -> tuple[list, list[float]]:
    if isinstance(line, Metric):
        if line.coords is None:
            raise InputError("the bounded line solver needs a line metric")
        ids, xs = list(line.points), [float(x) for x in line.coords]
    else:
        ids = list(line)
        xs = [float(x) for x in ids]
    order = sorted(range(len(ids)), key=lambda i: xs[i])
    for a, b in zip(order, order[1:]):
        if xs[b] - xs[a] <= 0:
            raise InputError(f"duplicate line coordinate {xs[a]}")
    return [ids[i] for i in order], [xs[i] for i in order]


def solve_bounded_line(db: Database, line, gamma: Constraint, weights: Weights,
                       tau: float | None) -> Repair | None:
    """Optimal repair moving each cell ``c`` at most ``w(c) * tau``, or ``None``.

    ``line`` is a line :class:`Metric` or a sequence of numeric point values.
    ``tau=None`` means no bound. Points that receive no cells must still allow
    their (locked) profile.
    """
    tau = math.inf if tau is None else float(tau)
    if tau < 0:
        raise InputError("tau must be >= 0")
    sig = db.signature
    ids, xs = _line_points(line)
    coord = dict(zip(ids, xs))
    for c in db.cells:
        if c.value not in coord:
            raise InputError(f"cell {c.id!r} sits at {c.value!r}, which is not a line point")

    q = sig.q
    per_attr: list[list[Cell]] = [[] for _ in range(q)]
    for c in db.movable_cells(weights):
        per_attr[sig.index(c.attr)].append(c)
    for lst in per_attr:
        lst.sort(key=lambda c: (coord[c.value], c.id))
    dims = tuple(len(lst) + 1 for lst in per_attr)
    wvec = weights.vector(sig)
    cell_x = [np.array([coord[c.value] for c in lst]) for lst in per_attr]

    n = len(ids)
    V = np.full(dims, INF)
    V[(0,) * q] = 0.0
    preds = []
    for r in range(n):
        v, x = ids[r], xs[r]
        offset = db.locked_profile(weights, v)
        legal = np.zeros(dims, dtype=bool)
        for t in np.ndindex(*dims):
            legal[t] = gamma.allows(v, tuple(a + b for a, b in zip(t, offset)))
        # separable prefix cost of sending the first k cells of attribute j to x
        cum = np.zeros(dims)
        lo, hi = [], []
        for j in range(q):
            dist = np.abs(cell_x[j] - x)
            shape = [1] * q
            shape[j] = dims[j]
            cum = cum + (wvec[j] * np.concatenate(([0.0], np.cumsum(dist)))).reshape(shape)
            ok = dist <= wvec[j] * tau + COST_TOL if math.isfinite(tau) else np.ones(len(dist), bool)
            idx = np.flatnonzero(ok)
            lo.append(int(idx[0]) if idx.size else 0)
            hi.append(int(idx[-1]) + 1 if idx.size else 0)
        new = np.full(dims, INF)
        pred = np.full(dims, -1, dtype=np.int64)
        for prev in np.ndindex(*dims):
            base = V[prev]
            if not np.isfinite(base):
                continue
            region = tuple(slice(a, None) for a in prev)
            shifted = tuple(slice(0, d - a) for d, a in zip(dims, prev))
            cand = base + cum[region] - cum[prev]
            mask = legal[shifted].copy()
            for j in range(q):
                ends = np.arange(prev[j], dims[j])
                okj = (ends == prev[j]) | ((lo[j] <= prev[j]) & (ends <= hi[j]))
                shape = [1] * q
                shape[j] = len(ends)
                mask &= okj.reshape(shape)
            cand = np.where(mask, cand, INF)
            sub_new, sub_pred = new[region], pred[region]
            better = (cand < sub_new - COST_TOL) | (np.isinf(sub_new) & np.isfinite(cand))
            sub_new[better] = cand[better]
            sub_pred[better] = np.ravel_multi_index(prev, dims)
        V = new
        preds.append(pred)

    full = tuple(d - 1 for d in dims)
    if not np.isfinite(V[full]):
        return None
    assignment = {c.id: c.value for c in db.locked_cells(weights)}
    cur = full
    for r in range(n - 1, -1, -1):
        prev = tuple(int(a) for a in np.unravel_index(preds[r][cur], dims))
        for j in range(q):
            for c in per_attr[j][prev[j]:cur[j]]:
                assignment[c.id] = ids[r]
        cur = prev
    assert cur == (0,) * q
    metric = Metric(tuple(ids), np.abs(np.subtract.outer(xs, xs)), "line", coords=tuple(xs))
    cost = repair_cost(db, assignment, metric, weights)
    if abs(cost - float(V[full])) > 1e-6 * max(1.0, cost):
        raise AssertionError(f"reconstructed cost {cost} differs from table optimum {V[full]}")
    return Repair(assignment, cost, {"table_cost": float(V[full]), "points": n})


def _candidates(db: Database, weights: Weights, tau: float) -> list:
    """Candidate point ids: original values keep their identity, new ones are floats."""
    items = []
    for v in db.values():
        items.append((float(v), 0, v))
    shifts = sorted({weights.of(a) * tau for a in db.signature.attributes if not weights.locked(a)})
    for v in db.values():
        for s in shifts:
            items.append((float(v) - s, 1, float(v) - s))
            items.append((float(v) + s, 1, float(v) + s))
    items.sort(key=lambda t: (t[0], t[1]))
    out: list = []
    last = None
    for x, _, ident in items:
        if last is not None and x - last <= 1e-9:
            continue
        out.append(ident)
        last = x
    return out


def candidate_values_full_line(db: Database, weights: Weights, tau: float) -> list[float]:
    """``Vals(D)`` together with ``v +- w(A) * tau``, deduplicated and sorted."""
    return [float(x) for x in _candidates(db, weights, float(tau))]


def solve_bounded_full_line(db: Database, gamma: Constraint, weights: Weights, tau: float) -> Repair | None:
    """Optimal bounded repair when every real number is an admissible value.

    Needs a uniform constraint that is closed under addition and allows the
    empty profile; then some optimal repair only uses the finite candidate set.
    """
    if not gamma.uniform:
        raise CapabilityError("the full-line solver needs a uniform constraint")
    if not gamma.default.holds((0,) * db.signature.q):
        raise CapabilityError("the full-line solver needs the zero profile to be allowed")
    if not closed_under_addition(gamma.default, db.counts()):
        raise CapabilityError("constraint is not closed under addition (bounded check up to the cell counts)")
    cands = _candidates(db, weights, float(tau))
    rep = solve_bounded_line(db, cands, gamma, weights, tau)
    if rep is None:
        return None
    return Repair(rep.assignment, rep.cost, {**rep.info, "candidates": len(cands)})
