"""Weak separation: certificates, a brute-force oracle, AD refinement and transfer.

A set D weakly separates (Y, Z) when D meets every member of Y in an infinite
set and every member of Z in a finite one.  Here "infinite" is always
witnessed by a list of at least k elements and "finite" by a code bound
checked up to a depth; no verdict asserts an infinitary fact outright.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from math import lcm
from typing import Mapping, Sequence

from .errors import InsufficientDepth, SubsetViolation, UniverseTooLarge
from .lazyset import (AdFamily, BinaryBranch, LazySet, check_promises, eventually_periodic,
                      from_json, intersection_below)
from .verdict import Verdict, certified, violated


@dataclass(frozen=True)
class SeparationInstance:
    family: AdFamily
    targets: frozenset[int]
    tree: object = None

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        bad = [i for i in self.targets if not 0 <= i < len(self.family)]
        if bad:
            raise ValueError(f"target indices out of range: {sorted(bad)}")

    @property
    def others(self) -> list[int]:
        return [i for i in range(len(self.family)) if i not in self.targets]


@dataclass(frozen=True)
class SeparatorCertificate:
    D: LazySet
    bounds: Mapping[int, int] = field(default_factory=dict)
    witnesses: Mapping[int, tuple[int, ...]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"D": self.D.to_json(),
                "bounds": {str(i): n for i, n in sorted(self.bounds.items())},
                "witnesses": {str(i): list(w) for i, w in sorted(self.witnesses.items())}}

    @classmethod
    def from_json(cls, obj, tree=None) -> "SeparatorCertificate":
        return cls(from_json(obj["D"], tree),
                   {int(i): int(n) for i, n in obj.get("bounds", {}).items()},
                   {int(i): tuple(int(x) for x in w) for i, w in obj.get("witnesses", {}).items()})


def verify_separator(inst: SeparationInstance, cert: SeparatorCertificate, depth: int, k: int) -> Verdict:
    """Check ``cert`` on the prefix of codes below ``depth``.

    Every target needs k strictly increasing witnesses lying in D and in the
    target; every other member must miss D on ``[bound, depth)``.
    """
    missing = [i for i in inst.others if i not in cert.bounds]
    if missing:
        return violated(("no_bound", missing[0]), "member outside the targets has no finiteness bound")
    top = max([cert.bounds[i] for i in inst.others] + [0])
    if depth < top:
        raise InsufficientDepth(f"depth {depth} below finiteness bound {top}")
    for y in sorted(inst.targets):
        wit = cert.witnesses.get(y, ())
        if wit and depth <= max(wit):
            raise InsufficientDepth(f"depth {depth} does not cover witness {max(wit)}")
        if len(wit) < k:
            return violated(("few_witnesses", y, len(wit)), f"target {y} has fewer than {k} witnesses")
        if any(a >= b for a, b in zip(wit, wit[1:])):
            return violated(("unordered_witnesses", y), "witnesses must strictly increase")
        member = inst.family[y]
        for x in wit:
            if x not in cert.D or x not in member:
                return violated(("bad_witness", y, x), "witness not in D and the target")
    for z in inst.others:
        bound = cert.bounds[z]
        for x in intersection_below(cert.D, inst.family[z], depth):
            if x >= bound:
                return violated(("hit", z, x), "D meets the member at or above its bound")
    return certified()


def _meets(mask: int, sets: Sequence[int], targets, tau: int) -> bool:
    for i, s in enumerate(sets):
        c = (mask & s).bit_count()
        if i in targets:
            if c < tau:
                return False
        elif c >= tau:
            return False
    return True


def brute_force_separator(universe_size: int, family: Sequence[set[int]], targets, tau: int) -> frozenset[int] | None:
    """Least D (binary-counter order over ``range(universe_size)``) with
    ``|D & Y| >= tau`` for targets and ``|D & Z| < tau`` otherwise."""
    if universe_size > 24:
        raise UniverseTooLarge(f"universe of size {universe_size} exceeds 24")
    targets = frozenset(targets)
    sets = [sum(1 << x for x in s if 0 <= x < universe_size) for s in family]
    for mask in range(1 << universe_size):
        if _meets(mask, sets, targets, tau):
            return frozenset(x for x in range(universe_size) if mask >> x & 1)
    return None


class _RoundRobin:
    """Shared pick schedule: step s serves set ``s mod n``, which takes its
    least element above everything picked so far."""

    def __init__(self, sets: Sequence[LazySet]):
        self.sets = tuple(sets)
        self.picks: list[list[int]] = [[] for _ in self.sets]
        self.members: list[set[int]] = [set() for _ in self.sets]
        self.alive = [True] * len(self.sets)
        self.top = -1
        self.step = 0

    def advance(self) -> bool:
        if not any(self.alive):
            return False
        i = self.step % len(self.sets)
        self.step += 1
        if self.alive[i]:
            x = self.sets[i].next_above(self.top)
            if x is None:
                self.alive[i] = False
            else:
                self.top = x
                self.picks[i].append(x)
                self.members[i].add(x)
        return True

    def cover(self, x: int) -> None:
        while self.top < x and self.advance():
            pass

    def next_pick_above(self, i: int, x: int) -> int | None:
        while True:
            ps = self.picks[i]
            if ps and ps[-1] > x:
                return ps[bisect.bisect_right(ps, x)]
            if not self.alive[i] or not self.advance():
                return None


class RefinedSet(LazySet):
    def __init__(self, schedule: _RoundRobin, index: int):
        self._schedule = schedule
        self.index = index
        self.source = schedule.sets[index]

    @property
    def universe(self):
        return self.source.universe

    @property
    def infinite(self):
        return self.source.infinite

    def __contains__(self, x):
        self._schedule.cover(x)
        return x in self._schedule.members[self.index]

    def next_above(self, x):
        return self._schedule.next_pick_above(self.index, x)

    def elements_below(self, depth):
        self._schedule.cover(depth)
        return [x for x in self._schedule.picks[self.index] if x < depth]


def refine_to_ad(sets: Sequence[LazySet], depth: int | None = None) -> list[RefinedSet]:
    """Pairwise disjoint infinite subsets ``a'_i`` of the inputs ``a_i``.

    Sets are served round-robin in index order; each takes its least element
    above every element chosen so far.  The outputs are lazily extended.
    """
    for i, s in enumerate(sets):
        if not s.infinite:
            raise ValueError(f"input {i} carries no infinitude witness")
    schedule = _RoundRobin(sets)
    if depth is not None:
        schedule.cover(depth)
    return [RefinedSet(schedule, i) for i in range(len(sets))]


def _first_disagreement(a: BinaryBranch, b: BinaryBranch) -> int | None:
    horizon = max(len(a.prefix), len(b.prefix)) + lcm(len(a.cycle), len(b.cycle))
    da = eventually_periodic(a.prefix, a.cycle)
    db = eventually_periodic(b.prefix, b.cycle)
    for n in range(horizon):
        if da(n) != db(n):
            return n
    return None


def canonical_ad_family(seeds: Sequence[tuple[Sequence[int], Sequence[int]]]) -> AdFamily:
    """Members ``{x|n : n}`` for eventually periodic binary sequences x = (prefix, cycle).

    Two members share exactly the prefixes of length <= the first disagreement
    L, whose codes are below ``2**(L+1) - 1``.
    """
    members = [BinaryBranch(tuple(p), tuple(c)) for p, c in seeds]
    bounds = {}
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            L = _first_disagreement(members[i], members[j])
            if L is None:
                raise ValueError(f"seeds {i} and {j} describe the same sequence")
            bounds[(i, j)] = (1 << (L + 1)) - 1
    return AdFamily(tuple(members), bounds)


def transfer_separator(cert: SeparatorCertificate, refinement: Mapping[int, tuple[LazySet, LazySet]],
                       depth: int) -> SeparatorCertificate:
    """Carry a certificate for refined targets ``a'_i`` over to the originals ``a_i``.

    ``refinement[i] = (a'_i, a_i)``.  D, witnesses and bounds are unchanged:
    a witness in ``D & a'_i`` lies in ``D & a_i`` because ``a'_i`` is a subset.
    """
    for i, (refined, original) in sorted(refinement.items()):
        for x in refined.elements_below(depth):
            if x not in original:
                raise SubsetViolation(i, x)
    for i, wit in cert.witnesses.items():
        if i in refinement:
            refined, original = refinement[i]
            for x in wit:
                if x not in original:
                    raise SubsetViolation(i, x)
    return SeparatorCertificate(cert.D, dict(cert.bounds), dict(cert.witnesses))


@dataclass(frozen=True)
class IntertwinedReport:
    c_counts: tuple[int, ...]
    b_counts: tuple[int, ...]
    c_hit: tuple[int, ...]
    b_miss: tuple[int, ...]
    refuted: bool
    witness: tuple[int, int] | None = None

    @property
    def verdict(self) -> str:
        return "RefutedToDepth" if self.refuted else "ConsistentToDepth"


def intertwined_probe(B: AdFamily, C: AdFamily, E: LazySet, depth: int, k: int,
                      c_many: int | None = None, b_many: int | None = None) -> IntertwinedReport:
    """Probe the intertwining clause for one set E below ``depth``.

    A C-member counts as hit when it meets E in >= k points, a B-member as
    missed when it meets E in < k points.  "Many" defaults to a strict
    majority of the family.  Refuted means E hits many C-members yet misses
    many B-members; the probe never claims the clause holds.
    """
    for fam in (B, C):
        v = check_promises(fam, depth)
        if not v:
            raise ValueError(f"AD promise broken: {v.witness}")
    c_counts = tuple(len(intersection_below(E, c, depth)) for c in C.members)
    b_counts = tuple(len(intersection_below(E, b, depth)) for b in B.members)
    c_hit = tuple(i for i, n in enumerate(c_counts) if n >= k)
    b_miss = tuple(i for i, n in enumerate(b_counts) if n < k)
    c_many = len(C) // 2 + 1 if c_many is None else c_many
    b_many = len(B) // 2 + 1 if b_many is None else b_many
    refuted = len(c_hit) >= c_many and len(b_miss) >= b_many and bool(c_hit) and bool(b_miss)
    return IntertwinedReport(c_counts, b_counts, c_hit, b_miss, refuted,
                             (c_hit[0], b_miss[0]) if refuted else None)
