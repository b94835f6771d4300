"""Instance generators: seeded random instances, hardness gadgets and the worked examples.

Every generator returns an instance document (the JSON format read by
:func:`metric_repair.io.instance_from_dict`), so fixtures are solver-agnostic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .io import instance_doc

TEMPLATES = ("none", "inclusion", "key", "foreign_key", "cap", "closed", "random")
METRIC_KINDS = ("line", "discrete", "tree", "matrix", "graph")


@dataclass(frozen=True)
class RandomSpec:
    n_points: int = 4
    cells: tuple[int, ...] = (2, 2)       # cells per attribute
    metric: str = "line"
    template: str = "inclusion"
    weight_range: tuple[float, float] = (1.0, 1.0)
    locked: tuple[int, ...] = ()          # 1-based attributes to lock
    override_prob: float = 0.0            # chance that a point gets its own random constraint
    tau: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not self.cells or any(c < 0 for c in self.cells):
            raise ValueError("cells must be a nonempty tuple of nonnegative counts")
        if self.metric not in METRIC_KINDS:
            raise ValueError(f"metric must be one of {METRIC_KINDS}")
        if self.template not in TEMPLATES:
            raise ValueError(f"template must be one of {TEMPLATES}")
        lo, hi = self.weight_range
        if lo < 0 or hi < lo:
            raise ValueError("weight_range must satisfy 0 <= lo <= hi")
        if any(not 1 <= a <= len(self.cells) for a in self.locked):
            raise ValueError("locked attribute index out of range")


def _random_metric(rng: np.random.Generator, kind: str, n: int) -> dict:
    pts = [f"p{i}" for i in range(n)]
    if kind == "line":
        coords = sorted(int(x) for x in rng.choice(4 * n + 1, size=n, replace=False))
        order = rng.permutation(n)
        return {"kind": "line", "points": pts, "coords": [coords[i] for i in order]}
    if kind == "discrete":
        return {"kind": "discrete", "points": pts}
    if kind == "tree":
        extra = int(rng.integers(0, 3)) if n >= 3 else 0
        verts = pts + [f"s{i}" for i in range(extra)]
        order = [verts[i] for i in rng.permutation(len(verts))]
        edges = []
        for k in range(1, len(order)):
            parent = order[int(rng.integers(0, k))]
            edges.append([parent, order[k], int(rng.integers(1, 5))])
        return {"kind": "tree", "points": pts, "edges": edges}
    if kind == "matrix":
        grid = rng.choice(36, size=n, replace=False)
        xy = np.stack([grid // 6, grid % 6], axis=1)
        dist = np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=2)
        return {"kind": "matrix", "points": pts, "dist": dist.astype(int).tolist()}
    # graph: a random spanning tree plus a few chords
    order = [pts[i] for i in rng.permutation(n)]
    edges = [[order[int(rng.integers(0, k))], order[k], int(rng.integers(1, 6))] for k in range(1, n)]
    for a, b in itertools.combinations(pts, 2):
        if rng.random() < 0.3:
            edges.append([a, b, int(rng.integers(1, 6))])
    return {"kind": "graph", "points": pts, "edges": edges}


def _atom(rng: np.random.Generator, q: int, counts: Sequence[int]) -> dict:
    j = int(rng.integers(1, q + 1))
    pick = rng.random()
    if pick < 0.3:
        return {"key": j}
    if pick < 0.6 and q >= 2:
        l, k = (int(x) + 1 for x in rng.choice(q, size=2, replace=False))
        return {"incl": [l, k]}
    if pick < 0.85:
        return {"le": [j, int(rng.integers(0, max(1, counts[j - 1]) + 1))]}
    if pick < 0.93:
        return {"ge": [j, int(rng.integers(0, 2))]}
    prof = [[int(rng.integers(0, c + 1)) for c in counts] for _ in range(int(rng.integers(1, 4)))]
    return {"set": [[0] * q] + prof}


def _random_expr(rng: np.random.Generator, q: int, counts: Sequence[int]) -> dict:
    terms = [_atom(rng, q, counts) for _ in range(int(rng.integers(1, 4)))]
    r = rng.random()
    if r < 0.15 and len(terms) >= 2:
        return {"or": terms}
    if r < 0.22:
        return {"not": terms[0]}
    return {"and": terms}


def _template(rng: np.random.Generator, name: str, q: int, counts: Sequence[int]) -> dict:
    if name == "none":
        return {"and": []}
    if name in ("inclusion", "foreign_key") and q < 2:
        raise ValueError(f"template {name!r} needs at least two attributes")
    if name == "inclusion":
        return {"incl": [1, 2]}
    if name == "foreign_key":
        return {"and": [{"key": 2}, {"incl": [1, 2]}]}
    if name == "key":
        return {"key": 1}
    if name == "cap":
        return {"le": [1, int(rng.integers(1, max(1, counts[0]) + 1))]}
    if name == "closed":
        if q < 2:
            return {"and": []}
        pairs = [(l, j) for l in range(1, q + 1) for j in range(1, q + 1) if l != j]
        k = int(rng.integers(1, min(2, len(pairs)) + 1))
        chosen = [pairs[i] for i in sorted(rng.choice(len(pairs), size=k, replace=False))]
        return {"and": [{"incl": [l, j]} for l, j in chosen]}
    return _random_expr(rng, q, counts)


def gen_random(spec: RandomSpec) -> dict:
    """Random instance document; the same RandomSpec always yields the same document."""
    rng = np.random.default_rng(spec.seed)
    q = len(spec.cells)
    attrs = [f"A{j + 1}" for j in range(q)]
    metric = _random_metric(rng, spec.metric, spec.n_points)
    pts = metric["points"]
    lo, hi = spec.weight_range
    weights = {}
    for j, a in enumerate(attrs):
        weights[a] = "locked" if j + 1 in spec.locked else round(float(rng.uniform(lo, hi)), 1)
    default = _template(rng, spec.template, q, spec.cells)
    overrides = {}
    for p in pts:
        if spec.override_prob and rng.random() < spec.override_prob:
            overrides[p] = _random_expr(rng, q, spec.cells)
    constraint = {"kind": "pointwise", "expr": default, "overrides": overrides} if overrides \
        else {"kind": "uniform", "expr": default}
    cells = []
    for j, a in enumerate(attrs):
        for k in range(spec.cells[j]):
            cells.append((f"c{j + 1}_{k}", a, pts[int(rng.integers(0, len(pts)))]))
    return instance_doc(attrs, weights, metric, constraint, cells, spec.tau)


def _parse_sets(S) -> list[tuple[str, tuple]]:
    items = list(S.items()) if isinstance(S, Mapping) else [(f"s{i + 1}", s) for i, s in enumerate(S)]
    return [(str(name), tuple(members)) for name, members in items]


def gen_apx_3sc(X: Sequence[str], S) -> dict:
    """Set-cover gadget: a repair of cost ``|X| + p`` exists iff a cover by ``p`` sets exists.

    Points are ``X``, one point per set and a hub ``r``; unit edges join ``r`` to
    every set and each set to its elements. Each element holds an ``A1``-cell,
    the hub holds one ``A2``-cell per set, and every ``A1`` needs an ``A2``.
    """
    X = [str(x) for x in X]
    sets = _parse_sets(S)
    xs = set(X)
    for name, members in sets:
        if len(members) != 3 or len(set(members)) != 3 or not set(members) <= xs:
            raise ValueError(f"set {name!r} must have exactly 3 distinct elements of X")
    hub = "r"
    points = X + [name for name, _ in sets] + [hub]
    if len(set(points)) != len(points):
        raise ValueError("element, set and hub names must be distinct")
    edges = [[hub, name, 1] for name, _ in sets]
    edges += [[x, name, 1] for name, members in sets for x in members]
    cells = [(f"a_{x}", "A1", x) for x in X] + [(f"b_{name}", "A2", hub) for name, _ in sets]
    return instance_doc(["A1", "A2"], {"A1": 1, "A2": 1},
                        {"kind": "graph", "points": points, "edges": edges, "allow_disconnected": True},
                        {"kind": "uniform", "expr": {"incl": [1, 2]}}, cells)


def gen_x3c_bounded(X: Sequence[str], S) -> dict:
    """Exact-cover gadget: a repair moving each cell at most one edge exists iff ``S`` has an exact cover."""
    X = [str(x) for x in X]
    if len(X) % 3:
        raise ValueError("|X| must be a multiple of 3")
    sets = _parse_sets(S)
    xs = set(X)
    for name, members in sets:
        if len(members) != 3 or len(set(members)) != 3 or not set(members) <= xs:
            raise ValueError(f"set {name!r} must have exactly 3 distinct elements of X")
    points = X + [name for name, _ in sets]
    if len(set(points)) != len(points):
        raise ValueError("element and set names must be distinct")
    edges = [[x, name, 1] for name, members in sets for x in members]
    cells = [(f"c_{x}", "A1", x) for x in X]
    # the gadget graph is usually disconnected; infinite distances simply forbid moves
    return instance_doc(["A1"], {"A1": 1},
                        {"kind": "graph", "points": points, "edges": edges, "allow_disconnected": True},
                        {"kind": "uniform", "expr": {"set": [[0], [3]]}}, cells, tau=1)


def gen_sat_bounded(cnf: Sequence[Sequence[int]]) -> dict:
    """SAT gadget: a repair moving each cell at most one edge exists iff ``cnf`` is satisfiable.

    Clauses are lists of nonzero ints (DIMACS style: ``-2`` is the negation of variable 2).
    """
    clauses = [list(c) for c in cnf]
    if any(not c for c in clauses):
        raise ValueError("empty clause")
    if any(not isinstance(l, (int, np.integer)) or l == 0 for c in clauses for l in c):
        raise ValueError("literals must be nonzero integers")
    n = max(abs(l) for c in clauses for l in c) if clauses else 0
    fs = [f"f{j + 1}" for j in range(len(clauses))]
    xs = [f"x{i + 1}" for i in range(n)]
    lits = [f"x{i + 1}{b}" for i in range(n) for b in ("T", "F")]
    edges = [[f"x{i + 1}", f"x{i + 1}{b}", 1] for i in range(n) for b in ("T", "F")]
    for j, c in enumerate(clauses):
        for l in sorted(set(c), key=lambda l: (abs(l), l < 0)):
            edges.append([fs[j], f"x{abs(l)}{'T' if l > 0 else 'F'}", 1])
    cells = [(f"a_{f}", "A1", f) for f in fs] + [(f"b_{x}", "A2", x) for x in xs]
    return instance_doc(["A1", "A2"], {"A1": 1, "A2": 1},
                        {"kind": "graph", "points": fs + xs + lits, "edges": edges, "allow_disconnected": True},
                        {"kind": "uniform", "expr": {"incl": [1, 2]}}, cells, tau=1)


def hamming_matrix(words: Sequence[str]) -> list[list[int]]:
    if len({len(w) for w in words}) > 1:
        raise ValueError("Hamming distance needs equal-length strings")
    return [[sum(a != b for a, b in zip(u, v)) for v in words] for u in words]


def _finite_metric(points: Sequence[str], kind: str) -> dict:
    if kind == "discrete":
        return {"kind": "discrete", "points": list(points)}
    if kind == "hamming":
        return {"kind": "matrix", "points": list(points), "dist": hamming_matrix(points)}
    raise ValueError("metric must be 'discrete' or 'hamming'")


PID_POINTS = ("437", "487", "987", "481", "719", "199", "779", "799")


def pid_instance(metric: str = "discrete") -> dict:
    """Person ids of a clinic: patients (clean), appointments and vaccinations.

    Every vaccinated person needs exactly one appointment and every appointment
    exactly one patient record.
    """
    cells = [("P1", "P.pid", "437"), ("P2", "P.pid", "487"), ("P3", "P.pid", "719"), ("P4", "P.pid", "799"),
             ("R1", "R.pid", "779"), ("R2", "R.pid", "437"), ("R3", "R.pid", "199"),
             ("V1", "V.pid", "719"), ("V2", "V.pid", "481"), ("V3", "V.pid", "987")]
    expr = {"and": [{"key": 1}, {"incl": [2, 1]}, {"key": 2}, {"incl": [3, 2]}]}
    return instance_doc(["P.pid", "R.pid", "V.pid"], {"P.pid": "locked", "R.pid": 1, "V.pid": 1.1},
                        _finite_metric(PID_POINTS, metric), {"kind": "uniform", "expr": expr}, cells)


def nurse_instance(metric: str = "discrete") -> dict:
    """Nurses on vaccination records against the clean used-shots registry, with per-nurse shot caps."""
    pts = ("018", "017", "078")
    cells = [("V1", "V.nurse", "018"), ("V2", "V.nurse", "017"), ("V3", "V.nurse", "078"),
             ("U1", "U.nurse", "078"), ("U2", "U.nurse", "017")]
    both = [{"incl": [1, 2]}, {"incl": [2, 1]}]
    shots = {"078": 5, "017": 1}
    overrides = {v: {"and": both + [{"le": [1, k]}]} for v, k in shots.items()}
    return instance_doc(["V.nurse", "U.nurse"], {"V.nurse": 1, "U.nurse": "locked"},
                        _finite_metric(pts, metric),
                        {"kind": "pointwise", "expr": {"and": both}, "overrides": overrides}, cells)


# Gadget inputs of the worked examples
X6 = ("x1", "x2", "x3", "x4", "x5", "x6")
X3C_SETS = {"s1": ("x1", "x2", "x3"), "s2": ("x3", "x4", "x5"), "s3": ("x4", "x5", "x6")}
APX_SETS = {"s1": ("x1", "x2", "x3"), "s2": ("x2", "x4", "x5"), "s3": ("x3", "x5", "x6"),
            "s4": ("x4", "x5", "x6")}
SAT_CNF = ((1, 2, 3), (-2, 3, 4), (-2, -3, -4))
