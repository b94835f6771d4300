"""Finite metrics, tree metrics and the casts that turn line/discrete metrics into trees."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import floyd_warshall

from .constraints import Constraint, ProfileExpr, ZeroOnly
from .core import InputError

KINDS = ("matrix", "graph", "line", "discrete", "tree")


@dataclass(frozen=True, order=True)
class Steiner:
    """A synthetic tree vertex; never equal to a user point id."""

    tag: str

    def __str__(self):
        return f"~{self.tag}"


def sort_key(v: Hashable):
    return (isinstance(v, Steiner), type(v).__name__, str(v) if not isinstance(v, (int, float)) else v)


@dataclass(frozen=True, eq=False)
class Metric:
    """Distances over an ordered finite point set, stored as a dense matrix.

    ``kind`` records where the distances came from; ``coords`` is set for line
    metrics and ``tree`` for tree metrics so solvers can dispatch on structure.
    """

    points: tuple
    matrix: np.ndarray
    kind: str = "matrix"
    coords: tuple[float, ...] | None = None
    tree: TreeMetric | None = None
    spec: Mapping[str, Any] | None = None
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        m = np.asarray(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        index = {p: i for i, p in enumerate(self.points)}
        if len(index) != len(self.points):
            raise InputError("duplicate point ids")
        if m.shape != (len(self.points), len(self.points)):
            raise InputError(f"distance matrix shape {m.shape} does not match {len(self.points)} points")
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.points)

    def __contains__(self, v):
        return v in self.index

    def dist(self, u: Hashable, v: Hashable) -> float:
        return float(self.matrix[self.index[u], self.index[v]])

    __call__ = dist

    def diameter(self) -> float:
        return float(self.matrix.max()) if len(self.points) else 0.0

    def axiom_violations(self, tol: float = 1e-9, limit: int = 20) -> list[str]:
        out = []
        m = self.matrix
        n = len(self.points)
        if not np.all(np.isfinite(m)):
            out.append("non-finite distances (disconnected graph?)")
        for i in range(n):
            if abs(m[i, i]) > tol:
                out.append(f"nonzero self-distance at {self.points[i]!r}")
        for i, j in itertools.combinations(range(n), 2):
            if abs(m[i, j] - m[j, i]) > tol:
                out.append(f"asymmetric: d({self.points[i]!r},{self.points[j]!r})")
            if m[i, j] < -tol:
                out.append(f"negative: d({self.points[i]!r},{self.points[j]!r})")
            elif m[i, j] <= tol and self.kind != "tree":
                out.append(f"distinct points at distance 0: {self.points[i]!r},{self.points[j]!r}")
        fm = np.where(np.isfinite(m), m, np.inf)
        # triangle inequality: d(a,c) <= d(a,b) + d(b,c)
        for b in range(n):
            via = fm[:, b][:, None] + fm[b, :][None, :]
            bad = np.argwhere(fm > via + tol)
            for a, c in bad:
                if len(out) >= limit:
                    return out
                out.append(f"triangle inequality: d({self.points[a]!r},{self.points[c]!r}) > "
                           f"d({self.points[a]!r},{self.points[b]!r}) + d({self.points[b]!r},{self.points[c]!r})")
        return out

    def submetric(self, points: Sequence[Hashable]) -> Metric:
        idx = [self.index[p] for p in points]
        return Metric(tuple(points), self.matrix[np.ix_(idx, idx)], "matrix")


@dataclass(frozen=True, eq=False)
class TreeMetric:
    """A weighted tree; ``root`` fixes the parent/child orientation."""

    vertices: tuple
    edges: tuple
    root: Hashable

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((u, v, float(w)) for u, v, w in self.edges))
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise InputError("duplicate tree vertices")
        if self.root not in vset:
            raise InputError(f"root {self.root!r} is not a vertex")
        if len(self.edges) != len(self.vertices) - 1:
            raise InputError("a tree on n vertices needs n-1 edges")
        adj: dict = {v: [] for v in self.vertices}
        for u, v, w in self.edges:
            if u not in vset or v not in vset:
                raise InputError(f"edge ({u!r},{v!r}) touches an unknown vertex")
            if w < 0 or not math.isfinite(w):
                raise InputError(f"edge ({u!r},{v!r}) has invalid weight {w}")
            adj[u].append((v, w))
            adj[v].append((u, w))
        parent = {self.root: None}
        order = [self.root]
        for u in order:
            for v, w in adj[u]:
                if v not in parent:
                    parent[v] = (u, w)
                    order.append(v)
        if len(order) != len(self.vertices):
            raise InputError("tree is not connected")
        children = {v: [] for v in self.vertices}
        for v in order[1:]:
            children[parent[v][0]].append(v)
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_parent", parent)
        object.__setattr__(self, "_children", children)
        object.__setattr__(self, "_order", order)

    def children(self, v) -> list:
        return list(self._children[v])

    def parent(self, v):
        p = self._parent[v]
        return None if p is None else p[0]

    def parent_edge(self, v) -> float:
        p = self._parent[v]
        return 0.0 if p is None else p[1]

    def preorder(self) -> list:
        return list(self._order)

    def postorder(self) -> list:
        return list(reversed(self._order))

    def distances_from(self, src) -> dict:
        dist = {src: 0.0}
        stack = [src]
        while stack:
            u = stack.pop()
            for v, w in self._adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + w
                    stack.append(v)
        return dist

    def dist(self, u, v) -> float:
        return self.distances_from(u)[v]

    def distance_matrix(self, among: Sequence[Hashable]) -> np.ndarray:
        among = list(among)
        out = np.zeros((len(among), len(among)))
        for i, u in enumerate(among):
            d = self.distances_from(u)
            out[i] = [d[v] for v in among]
        return out

    def to_metric(self, points: Sequence[Hashable]) -> Metric:
        return Metric(tuple(points), self.distance_matrix(points), "tree", tree=self)


@dataclass(frozen=True)
class CastResult:
    tree: TreeMetric
    constraint_overrides: Mapping[Hashable, ProfileExpr]


def _check_square(mat, n):
    if mat.ndim != 2 or mat.shape != (n, n):
        raise InputError(f"distance matrix must be {n}x{n}")


def build_metric(spec: Mapping[str, Any], validate: bool = True) -> Metric:
    """Build a :class:`Metric` from a JSON-style spec.

    ``kind`` is one of matrix, graph, line, discrete, tree. Graph distances are
    all-pairs shortest paths; tree distances are path sums.
    """
    kind = spec.get("kind")
    if kind not in KINDS:
        raise InputError(f"metric kind must be one of {KINDS}, got {kind!r}")
    points = spec.get("points")
    if kind == "line" and points is None and "coords" in spec:
        points = list(spec["coords"])
    if points is None:
        raise InputError("metric needs 'points'")
    points = tuple(points)
    if len(set(points)) != len(points):
        raise InputError("duplicate point ids")
    n = len(points)

    if kind == "matrix":
        try:
            mat = np.asarray(spec["dist"], dtype=float)
        except (KeyError, ValueError, TypeError) as e:
            raise InputError(f"matrix metric needs a numeric 'dist' matrix: {e}") from None
        _check_square(mat, n)
        if validate:
            if np.any(mat < 0):
                raise InputError("negative distance in matrix")
            if not np.allclose(mat, mat.T, atol=1e-9, rtol=0):
                raise InputError("distance matrix is not symmetric")
        return Metric(points, mat, "matrix", spec=dict(spec))

    if kind == "graph":
        idx = {p: i for i, p in enumerate(points)}
        w = np.full((n, n), np.inf)
        np.fill_diagonal(w, 0.0)
        for e in spec.get("edges", []):
            try:
                u, v, wt = e
                wt = float(wt)
                i, j = idx[u], idx[v]
            except (KeyError, ValueError, TypeError):
                raise InputError(f"bad graph edge {e!r}") from None
            if wt < 0:
                raise InputError(f"negative edge weight on {e!r}")
            w[i, j] = w[j, i] = min(w[i, j], wt)
        mat = floyd_warshall(w, directed=False) if n else w
        if validate and not spec.get("allow_disconnected", False) and np.any(~np.isfinite(mat)):
            raise InputError("graph is disconnected")
        return Metric(points, mat, "graph", spec=dict(spec))

    if kind == "line":
        coords = spec.get("coords", points)
        try:
            coords = tuple(float(x) for x in coords)
        except (TypeError, ValueError):
            raise InputError("line metric needs numeric 'coords'") from None
        if len(coords) != n:
            raise InputError("line metric: one coordinate per point")
        c = np.asarray(coords)
        return Metric(points, np.abs(c[:, None] - c[None, :]), "line", coords=coords, spec=dict(spec))

    if kind == "discrete":
        mat = 1.0 - np.eye(n)
        return Metric(points, mat, "discrete", spec=dict(spec))

    # tree: vertices not listed in points are synthetic (Steiner) vertices
    pset = set(points)
    edges = []
    verts = list(points)
    extra = {}
    for e in spec.get("edges", []):
        try:
            u, v, wt = e
            wt = float(wt)
        except (ValueError, TypeError):
            raise InputError(f"bad tree edge {e!r}") from None
        if wt < 0:
            raise InputError(f"negative edge weight on {e!r}")
        ends = []
        for x in (u, v):
            if x in pset:
                ends.append(x)
            else:
                if x not in extra:
                    extra[x] = Steiner(str(x))
                    verts.append(extra[x])
                ends.append(extra[x])
        edges.append((ends[0], ends[1], wt))
    root = spec.get("root")
    if root is None:
        root = min(verts, key=sort_key) if verts else None
    else:
        root = root if root in pset else extra.get(root, root)
    tree = TreeMetric(tuple(verts), tuple(edges), root)
    return Metric(points, tree.distance_matrix(points), "tree", tree=tree, spec=dict(spec))


def line_to_tree(values: Sequence[float], ids: Sequence[Hashable] | None = None) -> CastResult:
    """Path tree over sorted line values; edge weights are consecutive gaps."""
    values = [float(x) for x in values]
    ids = list(values) if ids is None else list(ids)
    if len(ids) != len(values):
        raise InputError("one id per value")
    order = sorted(range(len(values)), key=lambda i: values[i])
    for a, b in zip(order, order[1:]):
        if values[b] <= values[a]:
            raise InputError(f"duplicate line value {values[a]}")
    if not values:
        raise InputError("empty line")
    edges = [(ids[a], ids[b], values[b] - values[a]) for a, b in zip(order, order[1:])]
    return CastResult(TreeMetric(tuple(ids[i] for i in order), tuple(edges), ids[order[0]]), {})


def discrete_to_star(points: Iterable[Hashable]) -> CastResult:
    """Star with a synthetic center and half-unit edges; the center admits only the zero profile."""
    points = list(points)
    if not points:
        raise InputError("discrete metric needs at least one point")
    center = Steiner("center")
    edges = [(center, p, 0.5) for p in points]
    return CastResult(TreeMetric((center, *points), tuple(edges), center), {center: ZeroOnly()})


def metric_to_tree(metric: Metric) -> CastResult:
    """Tree form of a line, discrete or tree metric."""
    if metric.kind == "line":
        return line_to_tree(metric.coords, metric.points)
    if metric.kind == "discrete":
        return discrete_to_star(metric.points)
    if metric.kind == "tree":
        synth = {v: ZeroOnly() for v in metric.tree.vertices if isinstance(v, Steiner)}
        return CastResult(metric.tree, synth)
    raise InputError(f"a {metric.kind} metric is not a tree metric")


def binarize(tree: TreeMetric, gamma: Constraint) -> tuple[TreeMetric, Constraint]:
    """Reshape so every internal vertex has exactly two children.

    Extra children hang off zero-length synthetic vertices; single children get a
    zero-length synthetic sibling leaf. Every new vertex admits only the zero profile,
    and distances between existing vertices are unchanged.
    """
    edges = []
    verts = list(tree.vertices)
    new = {}
    counter = itertools.count()

    taken = set(verts)

    def fresh():
        s = Steiner(f"bin{next(counter)}")
        while s in taken:
            s = Steiner(f"bin{next(counter)}")
        verts.append(s)
        new[s] = ZeroOnly()
        return s

    for v in tree.preorder():
        kids = tree.children(v)
        if not kids:
            continue
        if len(kids) == 1:
            c = kids[0]
            edges.append((v, c, tree.parent_edge(c)))
            edges.append((v, fresh(), 0.0))
            continue
        cur = v
        rest = list(kids)
        while len(rest) > 2:
            c = rest.pop(0)
            edges.append((cur, c, tree.parent_edge(c)))
            s = fresh()
            edges.append((cur, s, 0.0))
            cur = s
        for c in rest:
            edges.append((cur, c, tree.parent_edge(c)))
    return TreeMetric(tuple(verts), tuple(edges), tree.root), gamma.with_overrides(new)
