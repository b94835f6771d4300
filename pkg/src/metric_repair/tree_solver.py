"""Exact optimal repair over a tree metric.

The tree is made binary first. Processing bottom-up, every vertex ``v`` gets a
table ``Opt_v[t]`` indexed by per-attribute counts ``t`` (one axis per attribute,
``t_j`` in ``0..n_j`` where ``n_j`` counts movable cells): the least cost of
placing exactly ``t_j`` cells of each attribute inside the subtree of ``v``,
where cells leaving or entering the subtree are charged up to ``v``.

For an internal vertex with children ``v1, v2`` the entry is

    min over t1 + t2 + i = t, (i + locked(v)) allowed at v, of
        sum_l [ Opt_{v_l}[t_l] + sum_j w_j * |n_j(T_{v_l}) - t_l_j| * len(v, v_l) ]

The absolute value counts cells crossing the edge in either direction.
Infeasible entries hold ``inf``; they are only ever added and compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .constraints import Constraint, ZeroOnly
from .core import COST_TOL, Database, InputError, Repair, Weights, repair_cost
from .metric import Steiner, TreeMetric, binarize, metric_to_tree

INF = np.inf


@dataclass
class PlacementTable:
    """DP tables and the choices needed to rebuild a placement."""

    tree: TreeMetric
    dims: tuple[int, ...]
    opt: dict            # vertex -> ndarray of shape dims
    choice_i: dict       # internal vertex -> ndarray of flat local-profile indices (-1 = infeasible)
    choice_t1: dict      # internal vertex -> ndarray of flat first-child target indices
    counts: dict         # vertex -> SubtreeCounts tuple

    def root_cost(self) -> float:
        root = self.tree.root
        return float(self.opt[root][tuple(d - 1 for d in self.dims)])


def subtree_counts(db: Database, tree: TreeMetric, weights: Weights | None = None) -> dict:
    """Per vertex, the number of movable cells of each attribute in its subtree."""
    q = db.signature.q
    local = {v: [0] * q for v in tree.vertices}
    for c in db.cells:
        if weights is not None and weights.locked(c.attr):
            continue
        if c.value not in local:
            raise InputError(f"cell {c.id!r} sits at {c.value!r}, which is not a tree vertex")
        local[c.value][db.signature.index(c.attr)] += 1
    out = {}
    for v in tree.postorder():
        acc = list(local[v])
        for ch in tree.children(v):
            for j, x in enumerate(out[ch]):
                acc[j] += x
        out[v] = tuple(acc)
    return out


def _legal_mask(gamma: Constraint, v: Hashable, dims, offset) -> np.ndarray:
    expr = ZeroOnly() if isinstance(v, Steiner) and v not in gamma.overrides else gamma.at(v)
    mask = np.zeros(dims, dtype=bool)
    for t in np.ndindex(*dims):
        mask[t] = expr.holds(tuple(a + b for a, b in zip(t, offset)))
    return mask


def _edge_cost(dims, n_child, wvec, length) -> np.ndarray:
    """Cost of the net flow across the edge for every target count vector."""
    grids = np.indices(dims, dtype=float)
    cost = np.zeros(dims)
    for j in range(len(dims)):
        if wvec[j]:
            cost += wvec[j] * np.abs(n_child[j] - grids[j]) * length
    return cost


def _shifted(arr, offset):
    """View of ``arr`` truncated so that adding ``offset`` stays inside the table."""
    return arr[tuple(slice(0, d - a) for d, a in zip(arr.shape, offset))]


def _region(arr, offset):
    return arr[tuple(slice(a, None) for a in offset)]


def min_plus(a: np.ndarray, b: np.ndarray, allowed_a: np.ndarray | None = None):
    """``c[s] = min over x <= s of a[x] + b[s - x]``; ties keep the lexicographically smallest ``x``.

    Returns ``(c, arg)`` with ``arg`` the flat index of the minimizing ``x`` (-1 where infinite).
    """
    dims = a.shape
    c = np.full(dims, INF)
    arg = np.full(dims, -1, dtype=np.int64)
    for x in np.ndindex(*dims):
        ax = a[x]
        if not np.isfinite(ax) or (allowed_a is not None and not allowed_a[x]):
            continue
        cand = ax + _shifted(b, x)
        region_c = _region(c, x)
        region_arg = _region(arg, x)
        better = cand < region_c - COST_TOL
        # an infinite slot accepts any finite candidate
        better |= np.isinf(region_c) & np.isfinite(cand)
        region_c[better] = cand[better]
        region_arg[better] = np.ravel_multi_index(x, dims)
    return c, arg


def combine_internal(child_tables, child_counts, edge_lengths, wvec, legal):
    """Table of an internal vertex from its two children's tables.

    ``legal[i]`` says whether local profile ``i`` (plus the locked cells already
    at the vertex) is allowed there. Returns ``(opt, choice_i, choice_t1)``.
    """
    (o1, o2), (n1, n2), (l1, l2) = child_tables, child_counts, edge_lengths
    dims = o1.shape
    e1 = o1 + _edge_cost(dims, n1, wvec, l1)
    e2 = o2 + _edge_cost(dims, n2, wvec, l2)
    below, t1_arg = min_plus(e1, e2)
    # local profile i on top of the children: opt[t] = min over legal i of below[t - i]
    opt, i_arg = min_plus(np.where(legal, 0.0, INF), below)
    t1_choice = np.full(dims, -1, dtype=np.int64)
    for t in np.ndindex(*dims):
        if i_arg[t] >= 0:
            i = np.unravel_index(i_arg[t], dims)
            s = tuple(a - b for a, b in zip(t, i))
            t1_choice[t] = t1_arg[s]
    return opt, i_arg, t1_choice


def build_tables(db: Database, tree: TreeMetric, gamma: Constraint, weights: Weights) -> PlacementTable:
    """Run the bottom-up dynamic program on an already binary tree."""
    sig = db.signature
    n = db.movable_counts(weights)
    dims = tuple(x + 1 for x in n)
    wvec = weights.vector(sig)
    counts = subtree_counts(db, tree, weights)
    opt, ci, ct = {}, {}, {}
    for v in tree.postorder():
        legal = _legal_mask(gamma, v, dims, db.locked_profile(weights, v))
        kids = tree.children(v)
        if not kids:
            opt[v] = np.where(legal, 0.0, INF)
            continue
        if len(kids) != 2:
            raise ValueError("build_tables needs a binary tree; call binarize first")
        a, b = kids
        opt[v], ci[v], ct[v] = combine_internal(
            (opt[a], opt[b]), (counts[a], counts[b]),
            (tree.parent_edge(a), tree.parent_edge(b)), wvec, legal)
    return PlacementTable(tree, dims, opt, ci, ct, counts)


def placements(table: PlacementTable) -> dict:
    """Per-vertex local profile chosen by the optimal trail from the root."""
    dims = table.dims
    tree = table.tree
    out = {}
    target = {tree.root: tuple(d - 1 for d in dims)}
    for v in tree.preorder():
        t = target[v]
        kids = tree.children(v)
        if not kids:
            out[v] = t
            continue
        flat_i = table.choice_i[v][t]
        assert flat_i >= 0, f"no choice recorded at {v!r} for {t}"
        i = tuple(int(x) for x in np.unravel_index(flat_i, dims))
        t1 = tuple(int(x) for x in np.unravel_index(table.choice_t1[v][t], dims))
        t2 = tuple(a - b - c for a, b, c in zip(t, i, t1))
        assert min(t2) >= 0
        out[v] = i
        target[kids[0]], target[kids[1]] = t1, t2
    return out


def reconstruct_assignment(table: PlacementTable, db: Database, weights: Weights) -> dict:
    """Turn per-vertex counts into a cell-to-vertex assignment.

    Each vertex fills its own slots from its own cells first, then from cells
    sent up by children, then from cells sent down by its parent; only the net
    surplus of a subtree ever crosses its parent edge, so every cell travels a
    simple path and the total equals the table cost.
    """
    tree = table.tree
    sig = db.signature
    place = placements(table)
    local = {v: [[] for _ in sig.attributes] for v in tree.vertices}
    for c in sorted(db.movable_cells(weights), key=lambda c: c.id):
        local[c.value][sig.index(c.attr)].append(c.id)

    placed_below = {}
    for v in tree.postorder():
        acc = list(place[v])
        for ch in tree.children(v):
            acc = [a + b for a, b in zip(acc, placed_below[ch])]
        placed_below[v] = acc

    assignment = {c.id: c.value for c in db.locked_cells(weights)}
    for j in range(sig.q):
        up: dict = {}
        keep: dict = {}
        for v in tree.postorder():
            pool = list(local[v][j])
            for ch in tree.children(v):
                pool += up[ch]
            needs = place[v][j] + sum(max(0, -_surplus(table, placed_below, ch, j))
                                      for ch in tree.children(v))
            keep[v], up[v] = pool[:needs], pool[needs:]
            if len(up[v]) != max(0, _surplus(table, placed_below, v, j)):
                raise AssertionError(f"flow mismatch at {v!r} for attribute {j}")
        incoming = {tree.root: []}
        for v in tree.preorder():
            avail = keep[v] + incoming[v]
            k = place[v][j]
            for cid in avail[:k]:
                assignment[cid] = v
            pos = k
            for ch in tree.children(v):
                deficit = max(0, -_surplus(table, placed_below, ch, j))
                incoming[ch] = avail[pos:pos + deficit]
                pos += deficit
            if pos != len(avail):
                raise AssertionError(f"supply/demand mismatch at {v!r} for attribute {j}")
    return assignment


def _surplus(table, placed_below, v, j) -> int:
    return table.counts[v][j] - placed_below[v][j]


def solve_tree(db: Database, tree: TreeMetric, gamma: Constraint, weights: Weights,
               *, return_table: bool = False):
    """Optimal repair on a tree metric, or ``None`` if no repair exists.

    Synthetic (:class:`Steiner`) vertices only ever admit the zero profile. The
    returned cost is the tree-metric cost of the reconstructed assignment.
    """
    for c in db.cells:
        if c.value not in tree._adj:
            raise InputError(f"cell {c.id!r} sits at {c.value!r}, which is not a tree vertex")
    btree, bgamma = binarize(tree, gamma)
    table = build_tables(db, btree, bgamma, weights)
    best = table.root_cost()
    if not np.isfinite(best):
        return (None, table) if return_table else None
    assignment = reconstruct_assignment(table, db, weights)
    cost = repair_cost(db, assignment, btree, weights)
    if abs(cost - best) > 1e-6 * max(1.0, best):
        raise AssertionError(f"reconstructed cost {cost} differs from table optimum {best}")
    rep = Repair(assignment, cost, {"table_cost": best})
    return (rep, table) if return_table else rep


def solve_tree_metric(db: Database, metric, gamma: Constraint, weights: Weights) -> Repair | None:
    """Exact repair on a line, discrete or tree :class:`~metric_repair.metric.Metric` via its tree cast."""
    cast = metric_to_tree(metric)
    return solve_tree(db, cast.tree, gamma.with_overrides(cast.constraint_overrides), weights)
