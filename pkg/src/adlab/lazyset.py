"""Depth-truncated infinite subsets of a countable universe.

Every set is coded over the naturals.  Sets over the nodes of an omega-tree
use the level-major node coding of :mod:`adlab.omega_tree`, so the same
machinery serves both universes.  A set is queried through
``elements_below(depth)`` (its elements with code ``< depth``), ``in`` and
``next_above``; infinite sets additionally answer ``witness(k)``.
"""
from __future__ import annotations

import bisect
import heapq
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import InsufficientDepth
from .verdict import Verdict, certified, violated


class LazySet(ABC):
    universe = "omega"

    @abstractmethod
    def __contains__(self, x: int) -> bool: ...

    @abstractmethod
    def next_above(self, x: int) -> int | None:
        """Least element strictly greater than ``x`` (``x=-1`` gives the minimum)."""

    @property
    @abstractmethod
    def infinite(self) -> bool:
        """True when the set carries an infinitude witness."""

    def __iter__(self) -> Iterator[int]:
        x = self.next_above(-1)
        while x is not None:
            yield x
            x = self.next_above(x)

    def iter_from(self, start: int) -> Iterator[int]:
        x = self.next_above(start - 1)
        while x is not None:
            yield x
            x = self.next_above(x)

    def elements_below(self, depth: int) -> list[int]:
        out = []
        for x in self:
            if x >= depth:
                break
            out.append(x)
        return out

    def witness(self, k: int) -> int:
        """The k-th element (0-based); only defined for infinite sets."""
        if not self.infinite:
            raise ValueError("set carries no infinitude witness")
        return next(islice(iter(self), k, None))

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no JSON encoding")


@dataclass(frozen=True, eq=False)
class Arith(LazySet):
    """``{a*n + b : n >= 0}``."""

    a: int
    b: int = 0

    def __post_init__(self):
        if self.a < 1 or self.b < 0:
            raise ValueError("arithmetic progression needs a >= 1 and b >= 0")

    def __contains__(self, x):
        return x >= self.b and (x - self.b) % self.a == 0

    def next_above(self, x):
        if x < self.b:
            return self.b
        return self.b + ((x - self.b) // self.a + 1) * self.a

    @property
    def infinite(self):
        return True

    def witness(self, k):
        return self.a * k + self.b

    def to_json(self):
        return {"kind": "arith", "a": self.a, "b": self.b}


@dataclass(frozen=True, eq=False)
class Poly(LazySet):
    """Values ``c0 + c1*n + c2*n**2 + ...`` for n >= 0 (strictly increasing)."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if any(c < 0 for c in self.coeffs) or not any(self.coeffs[1:]):
            raise ValueError("need non-negative coefficients and a positive non-constant term")

    def value(self, n: int) -> int:
        v = 0
        for c in reversed(self.coeffs):
            v = v * n + c
        return v

    def _first_index_above(self, x: int) -> int:
        hi = 1
        while self.value(hi) <= x:
            hi *= 2
        lo = 0
        while lo < hi:
            mid = (lo + hi) // 2
            if self.value(mid) > x:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def __contains__(self, x):
        if x < self.coeffs[0]:
            return False
        return self.value(self._first_index_above(x - 1)) == x

    def next_above(self, x):
        return self.value(self._first_index_above(x))

    @property
    def infinite(self):
        return True

    def witness(self, k):
        return self.value(k)

    def to_json(self):
        return {"kind": "poly", "coeffs": list(self.coeffs)}


@dataclass(frozen=True, eq=False)
class Finite(LazySet):
    elems: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(sorted(set(self.elems))))
        if self.elems and self.elems[0] < 0:
            raise ValueError("codes are natural numbers")

    def __contains__(self, x):
        i = bisect.bisect_left(self.elems, x)
        return i < len(self.elems) and self.elems[i] == x

    def next_above(self, x):
        i = bisect.bisect_right(self.elems, x)
        return self.elems[i] if i < len(self.elems) else None

    @property
    def infinite(self):
        return False

    def to_json(self):
        return {"kind": "finite", "elems": list(self.elems)}


@dataclass(frozen=True, eq=False)
class Union(LazySet):
    parts: tuple[LazySet, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def universe(self):
        return self.parts[0].universe if self.parts else "omega"

    def __contains__(self, x):
        return any(x in p for p in self.parts)

    def next_above(self, x):
        cands = [y for y in (p.next_above(x) for p in self.parts) if y is not None]
        return min(cands) if cands else None

    def __iter__(self):
        last = None
        for y in heapq.merge(*self.parts):
            if y != last:
                yield y
                last = y

    @property
    def infinite(self):
        return any(p.infinite for p in self.parts)

    def to_json(self):
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Patched(LazySet):
    """A base set with finitely many codes added and removed."""

    base: LazySet
    add: frozenset = frozenset()
    remove: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "add", frozenset(self.add))
        object.__setattr__(self, "remove", frozenset(self.remove) - frozenset(self.add))

    @property
    def universe(self):
        return self.base.universe

    def __contains__(self, x):
        return x in self.add or (x not in self.remove and x in self.base)

    def next_above(self, x):
        y = self.base.next_above(x)
        while y is not None and y in self.remove:
            y = self.base.next_above(y)
        extra = [a for a in self.add if a > x]
        if extra:
            m = min(extra)
            y = m if y is None else min(y, m)
        return y

    @property
    def infinite(self):
        return self.base.infinite

    def to_json(self):
        return {"kind": "patched", "base": self.base.to_json(),
                "add": sorted(self.add), "remove": sorted(self.remove)}


def eventually_periodic(prefix: Sequence[int], cycle: Sequence[int]) -> Callable[[int], int]:
    prefix, cycle = tuple(prefix), tuple(cycle)
    if not cycle:
        raise ValueError("cycle must be nonempty")

    def at(n: int) -> int:
        if n < len(prefix):
            return prefix[n]
        return cycle[(n - len(prefix)) % len(cycle)]

    return at


@dataclass(frozen=True, eq=False)
class BinaryBranch(LazySet):
    """``{x|n : n in omega}`` for an eventually periodic binary sequence x.

    A binary string s of length n is coded ``2**n - 1 + int(s, 2)``, i.e. the
    level-major code of s as a node of the full binary tree.
    """

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if any(b not in (0, 1) for b in self.prefix + self.cycle) or not self.cycle:
            raise ValueError("binary seed needs 0/1 digits and a nonempty cycle")

    def digit(self, n: int) -> int:
        return eventually_periodic(self.prefix, self.cycle)(n)

    def code(self, n: int) -> int:
        v = 0
        for i in range(n):
            v = 2 * v + self.digit(i)
        return (1 << n) - 1 + v

    def __contains__(self, x):
        if x < 0:
            return False
        n = (x + 1).bit_length() - 1
        return self.code(n) == x

    def next_above(self, x):
        if x < 0:
            return 0
        n = (x + 1).bit_length() - 1
        c = self.code(n)
        return c if c > x else self.code(n + 1)

    @property
    def infinite(self):
        return True

    def witness(self, k):
        return self.code(k)

    def to_json(self):
        return {"kind": "binary_branch", "prefix": list(self.prefix), "cycle": list(self.cycle)}


# Decoders for non-omega kinds are registered by the modules defining them.
DECODERS: dict[str, Callable[..., LazySet]] = {}


def from_json(obj: Mapping, tree=None) -> LazySet:
    kind = obj.get("kind")
    if kind in DECODERS:
        return DECODERS[kind](obj, tree)
    if kind == "arith":
        return Arith(int(obj["a"]), int(obj.get("b", 0)))
    if kind == "poly":
        return Poly(tuple(int(c) for c in obj["coeffs"]))
    if kind == "finite":
        return Finite(tuple(int(x) for x in obj["elems"]))
    if kind == "union":
        return Union(tuple(from_json(p, tree) for p in obj["parts"]))
    if kind == "patched":
        return Patched(from_json(obj["base"], tree), frozenset(obj.get("add", ())),
                       frozenset(obj.get("remove", ())))
    if kind == "binary_branch":
        return BinaryBranch(tuple(obj["prefix"]), tuple(obj["cycle"]))
    raise ValueError(f"unknown set kind {kind!r}")


@dataclass(frozen=True)
class AdFamily:
    """Sets with promised pairwise intersection bounds.

    ``pair_bounds[(i, j)]`` (i < j) promises ``members[i] & members[j]``
    is contained in ``range(N)``.
    """

    members: tuple[LazySet, ...]
    pair_bounds: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        bounds = {}
        for (i, j), n in dict(self.pair_bounds).items():
            if i == j:
                continue
            bounds[(min(i, j), max(i, j))] = int(n)
        n = len(self.members)
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) not in bounds:
                    raise ValueError(f"missing pair bound for members {i}, {j}")
        object.__setattr__(self, "pair_bounds", bounds)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def pair_bound(self, i: int, j: int) -> int:
        return self.pair_bounds[(min(i, j), max(i, j))]

    def to_json(self) -> dict:
        return {"members": [m.to_json() for m in self.members],
                "pair_bounds": [[i, j, n] for (i, j), n in sorted(self.pair_bounds.items())]}

    @classmethod
    def from_json(cls, obj: Mapping, tree=None) -> "AdFamily":
        members = tuple(from_json(m, tree) for m in obj["members"])
        bounds = {(int(i), int(j)): int(n) for i, j, n in obj.get("pair_bounds", [])}
        return cls(members, bounds)


@dataclass(frozen=True)
class ModulusFunction:
    values: Callable[[int], int]
    modulus: int = 0

    def __call__(self, n: int) -> int:
        return self.values(n)


def intersection_below(a: LazySet, b: LazySet, depth: int) -> list[int]:
    if depth < 0:
        raise InsufficientDepth("depth must be non-negative")
    return [x for x in a.elements_below(depth) if x in b]


def check_orthogonal(a: LazySet, b: LazySet, bound: int, depth: int) -> Verdict:
    """Check the promise ``a & b`` is contained in ``range(bound)`` on the prefix below depth."""
    if depth < bound:
        raise InsufficientDepth(f"depth {depth} below promised bound {bound}")
    for x in intersection_below(a, b, depth):
        if x >= bound:
            return violated(x, "common element at or above bound")
    return certified()


def check_promises(family: AdFamily, depth: int) -> Verdict:
    n = len(family)
    for i in range(n):
        for j in range(i + 1, n):
            bound = family.pair_bound(i, j)
            v = check_orthogonal(family[i], family[j], bound, max(depth, bound))
            if not v:
                return violated((i, j, v.witness), "pair bound promise broken")
    return certified()


def eventually_dominates(f: Callable[[int], int], g: Callable[[int], int], m: int, depth: int) -> Verdict:
    """``f(n) <= g(n)`` for all ``m <= n < depth``; reports the least counterexample."""
    if depth <= m:
        raise InsufficientDepth("depth must exceed the modulus")
    for n in range(m, depth):
        if f(n) > g(n):
            return violated(n)
    return certified()


def collection_from_relation(pairs: Iterable[tuple[object, int]]) -> list[frozenset[int]]:
    """Columns ``{n : (a, n) in S}`` for each ``a`` in the domain, in first-occurrence order."""
    cols: dict[object, set[int]] = {}
    for a, n in pairs:
        cols.setdefault(a, set()).add(n)
    return [frozenset(c) for c in cols.values()]
