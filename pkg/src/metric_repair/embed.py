"""Random dominating tree embeddings (FRT hierarchical decomposition) and stretch diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .constraints import ProfileExpr, ZeroOnly
from .metric import Metric, Steiner, TreeMetric

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def as_generator(rng: SeedLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class EmbeddedTree:
    """A sampled tree whose leaves are the metric's points."""

    tree: TreeMetric
    overrides: Mapping[Hashable, ProfileExpr]
    seed: object = None
    levels: int = 0
    scale: float = 1.0

    def distance_matrix(self, points) -> np.ndarray:
        return self.tree.distance_matrix(points)


def sample_frt_tree(metric: Metric, rng: SeedLike = None) -> EmbeddedTree:
    """Draw one tree from the FRT distribution over ``metric``.

    Distances are rescaled so the smallest positive one is 1. With a random
    permutation ``pi`` and ``beta = 2**U`` (``U`` uniform on [0, 1), so ``beta``
    has density ``1/(beta ln 2)`` on [1, 2)), level-``i`` clusters split their
    parent by sending each point to the first ``pi``-center within
    ``beta * 2**(i-1)``. A level-``i`` cluster hangs below its parent by an edge
    of length ``2**(i+1)`` (in original units); that length makes every tree
    distance at least the metric distance. Level-0 clusters are single points.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    gen = as_generator(rng)
    pts = list(metric.points)
    n = len(pts)
    if n == 0:
        raise ValueError("cannot embed an empty metric")
    d = np.asarray(metric.matrix, dtype=float)
    positive = d[d > 0]
    unit = float(positive.min()) if positive.size else 1.0
    scaled = d / unit
    diam = float(scaled.max())
    top = max(1, math.ceil(math.log2(diam))) if diam > 0 else 1

    perm = gen.permutation(n)
    beta = 2.0 ** gen.random()

    root = Steiner(f"{top}.0")
    verts: list = [root]
    edges: list = []
    label = np.zeros(n, dtype=np.int64)       # cluster index of each point at the current level
    names = [root]                             # vertex of each cluster at the current level
    for level in range(top - 1, -1, -1):
        radius = beta * 2.0 ** (level - 1)
        if level == 0:
            center = np.arange(n)
        else:
            within = scaled[perm] <= radius   # rows follow the permutation
            center = perm[np.argmax(within, axis=0)]
        keys: dict = {}
        new_label = np.empty(n, dtype=np.int64)
        new_names: list = []
        for p in range(n):
            k = (int(label[p]), int(center[p]))
            if k not in keys:
                keys[k] = len(new_names)
                vertex = pts[p] if level == 0 else Steiner(f"{level}.{len(new_names)}")
                new_names.append(vertex)
                verts.append(vertex)
                edges.append((names[k[0]], vertex, unit * 2.0 ** (level + 1)))
            new_label[p] = keys[k]
        label, names = new_label, new_names
    tree = TreeMetric(tuple(verts), tuple(edges), root)
    synth = {v: ZeroOnly() for v in verts if isinstance(v, Steiner)}
    return EmbeddedTree(tree, synth, seed, top, unit)


def dominance_violations(metric: Metric, emb: EmbeddedTree, tol: float = 1e-9) -> list[tuple]:
    """Pairs with ``d(u, v) > d_T(u, v) + tol``; empty for a dominating tree."""
    dt = emb.distance_matrix(metric.points)
    bad = np.argwhere(metric.matrix > dt + tol)
    return [(metric.points[i], metric.points[j]) for i, j in bad]


@dataclass
class StretchReport:
    samples: int
    mean: float                 # mean over pairs of the per-pair mean stretch
    max: float                  # largest single-sample stretch of any pair
    pair_mean: np.ndarray = field(repr=False)
    pair_max: np.ndarray = field(repr=False)
    min_stretch: float = 1.0
    dominance_ok: bool = True

    def to_dict(self) -> dict:
        return {"samples": self.samples, "mean_stretch": self.mean, "max_stretch": self.max,
                "min_stretch": self.min_stretch, "dominance_ok": self.dominance_ok}


def stretch_statistics(metric: Metric, n_samples: int, rng: SeedLike = 0) -> StretchReport:
    """Empirical stretch ``d_T / d`` over ``n_samples`` independent FRT trees."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n = len(metric.points)
    iu = np.triu_indices(n, 1)
    base = metric.matrix[iu]
    if isinstance(rng, np.random.Generator):
        seeds = [rng] * n_samples
    else:
        seeds = np.random.SeedSequence(rng).spawn(n_samples)
    total = np.zeros(base.shape)
    worst = np.zeros(base.shape)
    lowest = np.inf
    for s in seeds:
        emb = sample_frt_tree(metric, s)
        st = emb.distance_matrix(metric.points)[iu] / base
        total += st
        worst = np.maximum(worst, st)
        if st.size:
            lowest = min(lowest, float(st.min()))
    pair_mean = total / n_samples
    return StretchReport(
        samples=n_samples,
        mean=float(pair_mean.mean()) if pair_mean.size else 1.0,
        max=float(worst.max()) if worst.size else 1.0,
        pair_mean=pair_mean,
        pair_max=worst,
        min_stretch=lowest if np.isfinite(lowest) else 1.0,
        dominance_ok=bool(lowest >= 1 - 1e-9) if np.isfinite(lowest) else True,
    )
