"""Domain types: signatures, weights, cells, databases, repairs and their cost."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .constraints import Constraint, Profile, closed_under_addition

COST_TOL = 1e-9
LOCKED = "locked"


class RepairError(Exception):
    """Base class for errors raised by this package."""


class InputError(RepairError, ValueError):
    """Malformed or inconsistent input."""


class CapabilityError(RepairError):
    """The requested solver cannot handle this instance (a refusal, not a bug)."""


class ContractViolation(RepairError):
    """A repair breaks an invariant, e.g. a locked cell was moved."""


@dataclass(frozen=True)
class Signature:
    attributes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise InputError("a signature needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise InputError(f"duplicate attribute names in {self.attributes}")

    @property
    def q(self) -> int:
        return len(self.attributes)

    def index(self, attr: str) -> int:
        """0-based position of ``attr``."""
        try:
            return self.attributes.index(attr)
        except ValueError:
            raise InputError(f"unknown attribute {attr!r}") from None


@dataclass(frozen=True)
class Weights:
    """Per-attribute movement weight; ``None`` marks a locked (immovable) attribute."""

    values: Mapping[str, float | None]

    def __post_init__(self):
        clean = {}
        for a, w in dict(self.values).items():
            if w == LOCKED or w is None:
                clean[a] = None
                continue
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise InputError(f"weight of {a!r} must be finite and >= 0, got {w}")
            clean[a] = w
        object.__setattr__(self, "values", clean)

    @classmethod
    def uniform(cls, signature: Signature, w: float = 1.0) -> Weights:
        return cls({a: w for a in signature.attributes})

    def locked(self, attr: str) -> bool:
        return self.values[attr] is None

    def of(self, attr: str) -> float:
        w = self.values[attr]
        if w is None:
            raise ContractViolation(f"attribute {attr!r} is locked and has no finite weight")
        return w

    def movable_mask(self, signature: Signature) -> tuple[bool, ...]:
        return tuple(self.values[a] is not None for a in signature.attributes)

    def vector(self, signature: Signature) -> tuple[float, ...]:
        """Weights in signature order, 0 for locked attributes."""
        return tuple(0.0 if self.values[a] is None else self.values[a] for a in signature.attributes)

    def check(self, signature: Signature) -> None:
        missing = [a for a in signature.attributes if a not in self.values]
        if missing:
            raise InputError(f"no weight given for {missing}")


@dataclass(frozen=True)
class Cell:
    id: str
    attr: str
    value: Hashable


@dataclass(frozen=True, eq=False)
class Database:
    """A finite set of labeled cells, each positioned at a point."""

    signature: Signature
    cells: tuple[Cell, ...]
    _by_point: dict = field(init=False, repr=False, compare=False)
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        by_id = {}
        by_point: dict = defaultdict(list)
        for c in cells:
            if c.id in by_id:
                raise InputError(f"duplicate cell id {c.id!r}")
            self.signature.index(c.attr)
            by_id[c.id] = c
            by_point[c.value].append(c)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_by_point", dict(by_point))

    @classmethod
    def from_records(cls, signature: Signature | Sequence[str], records: Iterable[tuple]) -> Database:
        if not isinstance(signature, Signature):
            signature = Signature(tuple(signature))
        return cls(signature, tuple(Cell(str(i), a, v) for i, a, v in records))

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def cell(self, cid: str) -> Cell:
        return self._by_id[cid]

    def cells_at(self, v: Hashable) -> list[Cell]:
        return list(self._by_point.get(v, ()))

    def values(self) -> list:
        """Distinct values in order of first appearance."""
        return list(self._by_point)

    def counts(self) -> tuple[int, ...]:
        n = [0] * self.signature.q
        for c in self.cells:
            n[self.signature.index(c.attr)] += 1
        return tuple(n)

    def apply(self, assignment: Mapping[str, Hashable]) -> Database:
        """The database with every cell moved to ``assignment[cell.id]``."""
        if set(assignment) != set(self._by_id):
            raise ContractViolation("assignment must cover exactly the cells of the database")
        return Database(self.signature, tuple(Cell(c.id, c.attr, assignment[c.id]) for c in self.cells))

    def movable_cells(self, weights: Weights) -> list[Cell]:
        return [c for c in self.cells if not weights.locked(c.attr)]

    def locked_cells(self, weights: Weights) -> list[Cell]:
        return [c for c in self.cells if weights.locked(c.attr)]

    def locked_profile(self, weights: Weights, v: Hashable) -> Profile:
        """Counts of locked cells at ``v``; these never move."""
        p = [0] * self.signature.q
        for c in self._by_point.get(v, ()):
            if weights.locked(c.attr):
                p[self.signature.index(c.attr)] += 1
        return tuple(p)

    def movable_counts(self, weights: Weights) -> tuple[int, ...]:
        n = [0] * self.signature.q
        for c in self.cells:
            if not weights.locked(c.attr):
                n[self.signature.index(c.attr)] += 1
        return tuple(n)


@dataclass(frozen=True)
class Repair:
    assignment: Mapping[str, Hashable]
    cost: float
    info: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))

    def changed_cells(self, db: Database) -> list[str]:
        return [c.id for c in db.cells if self.assignment[c.id] != c.value]

    @classmethod
    def identity(cls, db: Database) -> Repair:
        return cls({c.id: c.value for c in db.cells}, 0.0)


def _dist_fn(metric) -> Callable[[Any, Any], float]:
    if hasattr(metric, "dist"):
        return metric.dist
    if callable(metric):
        return metric
    raise TypeError("metric must provide dist(u, v) or be callable")


def profile_of(db: Database, v: Hashable, points=None) -> Profile:
    """Coincidence profile of ``v``: per-attribute number of cells positioned at ``v``."""
    if points is not None and v not in points:
        raise InputError(f"unknown point {v!r}")
    p = [0] * db.signature.q
    for c in db.cells_at(v):
        p[db.signature.index(c.attr)] += 1
    return tuple(p)


def check_consistency(db: Database, gamma: Constraint, points: Iterable[Hashable]) -> list:
    """Points whose profile is not allowed, including empty points that disallow the zero profile."""
    points = list(points)
    known = set(points)
    for v in db.values():
        if v not in known:
            raise InputError(f"cell value {v!r} is not a point of the metric")
    return [v for v in points if not gamma.allows(v, profile_of(db, v))]


def repair_cost(db: Database, repair: Repair | Mapping[str, Hashable], metric, weights: Weights) -> float:
    """Weighted movement ``sum_c w(label(c)) * dist(D(c), E(c))``."""
    assignment = repair.assignment if isinstance(repair, Repair) else repair
    if set(assignment) != {c.id for c in db.cells}:
        raise ContractViolation("repair must be defined on exactly the cells of the database")
    dist = _dist_fn(metric)
    total = 0.0
    for c in db.cells:
        target = assignment[c.id]
        if weights.locked(c.attr):
            if target != c.value:
                raise ContractViolation(f"locked cell {c.id!r} was moved")
            continue
        if target != c.value:
            total += weights.of(c.attr) * dist(c.value, target)
    return total


def within_bound(db: Database, assignment: Mapping[str, Hashable], metric, weights: Weights,
                 tau: float) -> bool:
    dist = _dist_fn(metric)
    for c in db.movable_cells(weights):
        if dist(c.value, assignment[c.id]) > weights.of(c.attr) * tau + COST_TOL:
            return False
    return True


@dataclass(frozen=True)
class Instance:
    """Everything a solver needs: database, metric, constraint, weights and optional bound."""

    db: Database
    metric: Any
    constraint: Constraint
    weights: Weights
    tau: float | None = None

    @property
    def signature(self) -> Signature:
        return self.db.signature


@dataclass
class ValidationReport:
    metric_violations: list[str] = field(default_factory=list)
    unknown_points: list = field(default_factory=list)
    unknown_attributes: list[str] = field(default_factory=list)
    closed_under_addition: bool | None = None
    closure_check: str = "bounded check"
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.metric_violations or self.unknown_points or self.unknown_attributes)

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "metric_violations": list(self.metric_violations),
            "unknown_points": [str(p) for p in self.unknown_points],
            "unknown_attributes": list(self.unknown_attributes),
            "closed_under_addition": self.closed_under_addition,
            "closure_check": self.closure_check,
            "notes": list(self.notes),
        }


def validate_instance(inst: Instance, tol: float = 1e-9) -> ValidationReport:
    rep = ValidationReport()
    sig = inst.signature
    rep.metric_violations.extend(inst.metric.axiom_violations(tol))
    points = set(inst.metric.points)
    for v in inst.db.values():
        if v not in points:
            rep.unknown_points.append(v)
    for v in inst.constraint.overrides:
        if v not in points and v not in rep.unknown_points:
            rep.unknown_points.append(v)
    for a in inst.weights.values:
        if a not in sig.attributes:
            rep.unknown_attributes.append(a)
    for a in sig.attributes:
        if a not in inst.weights.values:
            rep.notes.append(f"attribute {a!r} has no weight")
            rep.unknown_attributes.append(a)
    try:
        inst.constraint.check_arity(sig.q)
    except ValueError as e:
        rep.notes.append(str(e))
        rep.unknown_attributes.append(str(e))
    if inst.constraint.uniform:
        rep.closed_under_addition = closed_under_addition(inst.constraint.default, inst.db.counts())
    else:
        rep.closure_check = "not applicable (non-uniform constraint)"
    if inst.tau is not None and inst.tau < 0:
        rep.notes.append("tau is negative")
        rep.metric_violations.append("tau must be >= 0")
    return rep
