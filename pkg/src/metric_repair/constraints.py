"""Coincidence constraints: per-point sets of allowed coincidence profiles.

A profile is a tuple of ``q`` nonnegative counts, one per signature attribute.
Constraint sets are usually infinite, so they are represented by small
expression trees (:class:`ProfileExpr`) and evaluated pointwise.

Attribute indices inside expressions are 1-based, matching the instance file
format.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

Profile = tuple[int, ...]


class ProfileExpr:
    """Base class of the profile-set expression language."""

    def holds(self, p: Sequence[int]) -> bool:
        raise NotImplementedError

    def __contains__(self, p: Sequence[int]) -> bool:
        return self.holds(p)

    def __and__(self, other: ProfileExpr) -> ProfileExpr:
        return And((self, other))

    def __or__(self, other: ProfileExpr) -> ProfileExpr:
        return Or((self, other))

    def __invert__(self) -> ProfileExpr:
        return Not(self)

    def max_index(self) -> int:
        return 0

    def check_arity(self, q: int) -> None:
        """Raise ``ValueError`` if the expression refers past attribute ``q``."""
        if self.max_index() > q:
            raise ValueError(f"constraint refers to attribute {self.max_index()} but q={q}")

    def to_json(self, q: int | None = None) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class Everything(ProfileExpr):
    def holds(self, p):
        return True

    def to_json(self, q=None):
        return {"and": []}


@dataclass(frozen=True)
class KeyAtom(ProfileExpr):
    """At most one cell of attribute ``j``."""

    j: int

    def holds(self, p):
        return p[self.j - 1] <= 1

    def max_index(self):
        return self.j

    def to_json(self, q=None):
        return {"key": self.j}


@dataclass(frozen=True)
class InclAtom(ProfileExpr):
    """Inclusion ``A_l ⊑ A_j``: no ``l``-cell unless some ``j``-cell shares the value."""

    l: int
    j: int

    def holds(self, p):
        return p[self.l - 1] == 0 or p[self.j - 1] > 0

    def max_index(self):
        return max(self.l, self.j)

    def to_json(self, q=None):
        return {"incl": [self.l, self.j]}


@dataclass(frozen=True)
class LeAtom(ProfileExpr):
    j: int
    k: int

    def holds(self, p):
        return p[self.j - 1] <= self.k

    def max_index(self):
        return self.j

    def to_json(self, q=None):
        return {"le": [self.j, self.k]}


@dataclass(frozen=True)
class GeAtom(ProfileExpr):
    j: int
    k: int

    def holds(self, p):
        return p[self.j - 1] >= self.k

    def max_index(self):
        return self.j

    def to_json(self, q=None):
        return {"ge": [self.j, self.k]}


@dataclass(frozen=True)
class ExplicitSet(ProfileExpr):
    profiles: frozenset

    def __init__(self, profiles: Iterable[Sequence[int]]):
        object.__setattr__(self, "profiles", frozenset(tuple(int(x) for x in p) for p in profiles))
        lengths = {len(p) for p in self.profiles}
        if len(lengths) > 1:
            raise ValueError("explicit profiles have differing lengths")

    def holds(self, p):
        return tuple(p) in self.profiles

    def max_index(self):
        return max((len(p) for p in self.profiles), default=0)

    def check_arity(self, q):
        for prof in self.profiles:
            if len(prof) != q:
                raise ValueError(f"explicit profile {prof} has length {len(prof)}, expected {q}")

    def to_json(self, q=None):
        return {"set": [list(p) for p in sorted(self.profiles)]}


@dataclass(frozen=True)
class ZeroOnly(ProfileExpr):
    """Only the all-zero profile; used for synthetic tree vertices."""

    def holds(self, p):
        return not any(p)

    def to_json(self, q=None):
        if q is None:
            raise ValueError("serializing the zero-only constraint needs q")
        return {"set": [[0] * q]}


@dataclass(frozen=True)
class And(ProfileExpr):
    terms: tuple

    def __init__(self, terms: Iterable[ProfileExpr]):
        object.__setattr__(self, "terms", tuple(terms))

    def holds(self, p):
        return all(t.holds(p) for t in self.terms)

    def max_index(self):
        return max((t.max_index() for t in self.terms), default=0)

    def check_arity(self, q):
        for t in self.terms:
            t.check_arity(q)

    def to_json(self, q=None):
        return {"and": [t.to_json(q) for t in self.terms]}


@dataclass(frozen=True)
class Or(ProfileExpr):
    terms: tuple

    def __init__(self, terms: Iterable[ProfileExpr]):
        object.__setattr__(self, "terms", tuple(terms))

    def holds(self, p):
        return any(t.holds(p) for t in self.terms)

    def max_index(self):
        return max((t.max_index() for t in self.terms), default=0)

    def check_arity(self, q):
        for t in self.terms:
            t.check_arity(q)

    def to_json(self, q=None):
        return {"or": [t.to_json(q) for t in self.terms]}


@dataclass(frozen=True)
class Not(ProfileExpr):
    term: ProfileExpr

    def holds(self, p):
        return not self.term.holds(p)

    def max_index(self):
        return self.term.max_index()

    def check_arity(self, q):
        self.term.check_arity(q)

    def to_json(self, q=None):
        return {"not": self.term.to_json(q)}


def key(j: int) -> ProfileExpr:
    return KeyAtom(j)


def inclusion(l: int, j: int) -> ProfileExpr:
    return InclAtom(l, j)


def foreign_key(l: int, j: int) -> ProfileExpr:
    """``A_l ⊑_k A_j``: inclusion plus a key on the referenced attribute."""
    return And((KeyAtom(j), InclAtom(l, j)))


def expr_from_json(obj: Any) -> ProfileExpr:
    """Parse the JSON form (``{"key": j}``, ``{"incl": [l, j]}``, ...)."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"constraint expression must be a one-key object, got {obj!r}")
    (tag, arg), = obj.items()
    if tag == "key":
        return KeyAtom(_pos_int(arg))
    if tag == "incl":
        l, j = _pair(arg)
        return InclAtom(_pos_int(l), _pos_int(j))
    if tag == "le":
        j, k = _pair(arg)
        return LeAtom(_pos_int(j), _nonneg_int(k))
    if tag == "ge":
        j, k = _pair(arg)
        return GeAtom(_pos_int(j), _nonneg_int(k))
    if tag == "set":
        if not isinstance(arg, list):
            raise ValueError("'set' expects a list of profiles")
        return ExplicitSet(arg)
    if tag == "and":
        return And(expr_from_json(t) for t in _list(arg, tag))
    if tag == "or":
        return Or(expr_from_json(t) for t in _list(arg, tag))
    if tag == "not":
        return Not(expr_from_json(arg))
    raise ValueError(f"unknown constraint atom {tag!r}")


def _list(arg, tag):
    if not isinstance(arg, list):
        raise ValueError(f"'{tag}' expects a list")
    return arg


def _pair(arg):
    if not isinstance(arg, list) or len(arg) != 2:
        raise ValueError(f"expected a pair, got {arg!r}")
    return arg


def _pos_int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise ValueError(f"attribute index must be a positive integer, got {x!r}")
    return x


def _nonneg_int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise ValueError(f"bound must be a nonnegative integer, got {x!r}")
    return x


@dataclass(frozen=True)
class Constraint:
    """A default profile set plus per-point overrides (non-uniform case)."""

    default: ProfileExpr
    overrides: Mapping[Hashable, ProfileExpr] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "overrides", dict(self.overrides))

    @property
    def uniform(self) -> bool:
        return not self.overrides

    def at(self, v: Hashable) -> ProfileExpr:
        return self.overrides.get(v, self.default)

    def allows(self, v: Hashable, p: Sequence[int]) -> bool:
        return self.at(v).holds(p)

    def with_overrides(self, extra: Mapping[Hashable, ProfileExpr]) -> Constraint:
        merged = dict(self.overrides)
        merged.update(extra)
        return Constraint(self.default, merged)

    def check_arity(self, q: int) -> None:
        self.default.check_arity(q)
        for e in self.overrides.values():
            e.check_arity(q)


def eval_membership(gamma: Constraint, v: Hashable, p: Sequence[int]) -> bool:
    """True iff profile ``p`` is allowed at point ``v``."""
    return gamma.allows(v, p)


def profiles_up_to(caps: Sequence[int]) -> Iterator[Profile]:
    return itertools.product(*(range(c + 1) for c in caps))


def closed_under_addition(expr: ProfileExpr, caps: Sequence[int]) -> bool:
    """Bounded closure check: every sum of two members that stays within ``caps`` is a member.

    Sound and complete for databases whose per-attribute counts are at most ``caps``.
    """
    members = [p for p in profiles_up_to(caps) if expr.holds(p)]
    for a in members:
        for b in members:
            s = tuple(x + y for x, y in zip(a, b))
            if all(x <= c for x, c in zip(s, caps)) and not expr.holds(s):
                return False
    return True
