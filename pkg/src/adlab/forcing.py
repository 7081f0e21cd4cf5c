"""The tree forcing Q_T(X) at desk scale.

A condition is a triple (stem, h, side): a height-increasing node sequence, a
height-floor function on such sequences (finite support, default 0) and a
finite set of indices of family members that later stem nodes must avoid.
``q <= p`` ("q extends p") when q's stem extends p's, q's floors dominate p's,
q's side contains p's and every new stem node of q lies outside p's side
members.

Generic runs service dense sets round-robin and read a separator off the
final stem.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientDepth, StemMismatch, TooFewSets, WitnessExhausted
from .lazyset import AdFamily, Finite, LazySet
from .omega_tree import OmegaTree
from .separation import SeparatorCertificate
from .verdict import Verdict, certified, violated

Stem = tuple[int, ...]


@dataclass(frozen=True)
class Condition:
    stem: Stem = ()
    hmap: tuple[tuple[Stem, int], ...] = ()
    side: frozenset[int] = frozenset()

    def __post_init__(self):
        items = self.hmap.items() if isinstance(self.hmap, Mapping) else self.hmap
        norm = tuple(sorted((tuple(t), int(v)) for t, v in items if v))
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "hmap", norm)
        object.__setattr__(self, "side", frozenset(self.side))
        object.__setattr__(self, "_h", dict(norm))

    def h(self, tau: Sequence[int]) -> int:
        return self._h.get(tuple(tau), 0)

    @property
    def support(self) -> list[Stem]:
        return [t for t, _ in self.hmap]

    def to_json(self) -> dict:
        return {"stem": list(self.stem), "hmap": [[list(t), v] for t, v in self.hmap],
                "side": sorted(self.side)}


def _in_side(family: AdFamily, side: Iterable[int], node: int) -> int | None:
    for a in sorted(side):
        if node in family[a]:
            return a
    return None


def validate_condition(tree: OmegaTree, family: AdFamily, p: Condition) -> Verdict:
    heights = [tree.height(c) for c in p.stem]
    for i in range(1, len(heights)):
        if heights[i - 1] >= heights[i]:
            return violated(("stem", i), "stem heights must strictly increase")
    for a in p.side:
        if not 0 <= a < len(family):
            return violated(("side", a), "side index out of range")
    for i, ht in enumerate(heights):
        if p.h(p.stem[:i]) > ht:
            return violated(i, "stem node below the height floor of its prefix")
    return certified()


def extends(tree: OmegaTree, family: AdFamily, q: Condition, p: Condition) -> Verdict:
    """Is ``q <= p``?  A violation names the first failing clause (1-4)."""
    n = len(p.stem)
    if q.stem[:n] != p.stem:
        return violated((1, None), "stem is not an extension")
    for tau in p.support:
        if q.h(tau) < p.h(tau):
            return violated((2, tau), "height floor decreased")
    if not p.side <= q.side:
        return violated((3, min(p.side - q.side)), "side condition shrank")
    for i in range(n, len(q.stem)):
        a = _in_side(family, p.side, q.stem[i])
        if a is not None:
            return violated((4, i), f"new stem node lies in side member {a}")
    return certified()


def merge_same_stem(p: Condition, q: Condition) -> Condition:
    """Common extension with the same stem: pointwise max floors, union of sides."""
    if p.stem != q.stem:
        raise StemMismatch("conditions have different stems")
    h = dict(p.hmap)
    for t, v in q.hmap:
        h[t] = max(h.get(t, 0), v)
    return Condition(p.stem, h, p.side | q.side)


def centered_class(p: Condition) -> Stem:
    """Index of the centered piece containing p; conditions sharing it merge."""
    return p.stem


def extensible_to(tree: OmegaTree, family: AdFamily, p: Condition, tau: Sequence[int]) -> Verdict:
    tau = tuple(tau)
    n = len(p.stem)
    if tau[:n] != p.stem:
        return violated(("prefix", None), "tau does not extend the stem")
    heights = [tree.height(c) for c in tau]
    for i in range(n, len(tau)):
        if i and heights[i - 1] >= heights[i]:
            return violated(("increasing", i), "tau is not height-increasing")
        if p.h(tau[:i]) > heights[i]:
            return violated(("floor", i), "node below height floor")
        if _in_side(family, p.side, tau[i]) is not None:
            return violated(("side", i), "node inside a side member")
    return certified()


def in_ideal(X: LazySet, family: AdFamily, F: Iterable[int], bound: int, depth: int) -> Verdict:
    """Is X covered by the members indexed by F on codes in ``[bound, depth)``?"""
    if depth < bound:
        raise InsufficientDepth("depth below bound")
    F = sorted(F)
    for x in X.iter_from(bound):
        if x >= depth:
            break
        if not any(x in family[i] for i in F):
            return violated(x, "element escapes the finite union")
    return certified()


@dataclass(frozen=True, eq=False)
class EscapeWitness:
    """Produces elements of ``source`` outside finitely many family members.

    This is the executable form of ``source`` being positive for the ideal
    generated by the family; ``fuel`` caps the candidates examined per call.
    """

    source: LazySet
    tree: OmegaTree
    fuel: int = 100_000

    def escape(self, family: AdFamily, F: Iterable[int], how_many: int, height_floor: int) -> list[int]:
        F = sorted(F)
        out: list[int] = []
        spent = 0
        for x in self.source.iter_from(self.tree.offset(height_floor)):
            spent += 1
            if spent > self.fuel:
                break
            if not any(x in family[i] for i in F):
                out.append(x)
                if len(out) == how_many:
                    return out
        raise WitnessExhausted(f"found {len(out)} of {how_many} escaping nodes within fuel")


@dataclass(frozen=True)
class Avoid:
    index: int

    def label(self) -> str:
        return f"avoid:{self.index}"


@dataclass(frozen=True)
class Hit:
    """Meet the positive set behind ``witness`` above height m.

    With ``m=None`` the n-th service (from 0) uses threshold n.  ``target``
    names the family index whose certificate witnesses the hits feed.
    """

    witness: EscapeWitness
    m: int | None = None
    target: int | None = None

    def label(self) -> str:
        return f"hit:{self.target}"


def extend_avoid(p: Condition, a: int) -> Condition:
    if a in p.side:
        return p
    return Condition(p.stem, p.hmap, p.side | {a})


def hit_floor(tree: OmegaTree, p: Condition, m: int) -> int:
    return max([m, p.h(p.stem)] + [tree.height(c) for c in p.stem]) + 1


def extend_hit(tree: OmegaTree, family: AdFamily, p: Condition, witness: EscapeWitness, m: int) -> Condition:
    """Append the least-coded node of the positive set that avoids p's side
    and sits at height >= max(m, h_p(stem), stem heights) + 1."""
    t, = witness.escape(family, p.side, 1, hit_floor(tree, p, m))
    return Condition(p.stem + (t,), p.hmap, p.side)


@dataclass
class RunResult:
    certificate: SeparatorCertificate
    chain: list[Condition]
    trace: list[dict]
    services: dict[int, int] = field(default_factory=dict)

    @property
    def final(self) -> Condition:
        return self.chain[-1]


def generic_run(tree: OmegaTree, family: AdFamily, tasks: Sequence[Avoid | Hit], fuel: int,
                start: Condition | None = None) -> RunResult:
    """Descend through ``fuel`` conditions, servicing ``tasks`` round-robin.

    The separator D is the final stem.  Avoid(A) first serviced at step s gets
    finiteness bound (max stem code at s) + 1: later stem nodes avoid A.
    Each Hit task's witnesses are the stem nodes its services appended.
    """
    p = start or Condition()
    chain = [p]
    trace = []
    bounds: dict[int, int] = {}
    hits: dict[int, list[int]] = {}
    services = Counter()
    for step in range(fuel):
        if not tasks:
            break
        ti = step % len(tasks)
        task = tasks[ti]
        n = services[ti]
        if isinstance(task, Avoid):
            p = extend_avoid(p, task.index)
            if task.index not in bounds:
                bounds[task.index] = max(p.stem, default=-1) + 1
        else:
            p = extend_hit(tree, family, p, task.witness, n if task.m is None else task.m)
            if task.target is not None:
                hits.setdefault(task.target, []).append(p.stem[-1])
        services[ti] += 1
        chain.append(p)
        trace.append({"step": step, "task": task.label(), "stem": list(p.stem),
                      "side": sorted(p.side), "hmap_support": [[list(t), v] for t, v in p.hmap]})
    cert = SeparatorCertificate(Finite(p.stem), bounds, {y: tuple(w) for y, w in hits.items()})
    return RunResult(cert, chain, trace, dict(services))


def replay_trace(tree: OmegaTree, family: AdFamily, trace: Sequence[Mapping]) -> Verdict:
    """Re-check a run trace: once Avoid(A) is serviced no later stem node is
    in A, and the nodes appended by each Hit task strictly increase in height."""
    avoided: dict[int, int] = {}
    last_hit_height: dict[str, int] = {}
    prev_len = 0
    for rec in trace:
        stem = rec["stem"]
        task = rec["task"]
        for node in stem[prev_len:]:
            for a, s in avoided.items():
                if node in family[a]:
                    return violated((rec["step"], a, node), "stem node inside an avoided member")
        if task.startswith("avoid:"):
            avoided.setdefault(int(task.split(":")[1]), rec["step"])
        elif len(stem) > prev_len:
            ht = tree.height(stem[-1])
            if ht <= last_hit_height.get(task, -1):
                return violated((rec["step"], task), "hit heights did not increase")
            last_hit_height[task] = ht
        prev_len = len(stem)
    return certified()


@dataclass(frozen=True)
class Preparation:
    E: frozenset[int]
    misses: dict[int, int]
    pair: tuple[int, int]


def preparation_Etau(U: Sequence[Iterable[int]], pair_bound: int, max_misses: int = 1) -> Preparation:
    """Nodes forbidden by all but at most ``max_misses`` of the sets U.

    E lies inside ``U[b] & U[c]`` for the least pair (b, c) of sets containing
    all of E, so ``|E| <= pair_bound``.  Such a pair exists whenever
    ``len(U) >= max_misses * (pair_bound + 1) + 2`` (each of pair_bound + 1
    nodes of E would spoil at most max_misses sets, leaving two sets sharing
    them all); otherwise TooFewSets may be raised.
    """
    U = [frozenset(u) for u in U]
    if len(U) < 2:
        raise TooFewSets("need at least two sets")
    for b, c in itertools.combinations(range(len(U)), 2):
        if len(U[b] & U[c]) > pair_bound:
            raise ValueError(f"sets {b} and {c} share more than {pair_bound} nodes")
    universe = frozenset().union(*U)
    misses = {t: sum(t not in u for u in U) for t in sorted(universe)}
    E = frozenset(t for t, m in misses.items() if m <= max_misses)
    for b, c in itertools.combinations(range(len(U)), 2):
        if E <= U[b] and E <= U[c]:
            return Preparation(E, misses, (b, c))
    raise TooFewSets(f"{len(U)} sets are too few to confine E = {sorted(E)} to a pairwise intersection")


def is_sunflower(sets: Sequence[frozenset], idx: Sequence[int]) -> frozenset | None:
    if not idx:
        return None
    core = frozenset.intersection(*(sets[i] for i in idx))
    for a, b in itertools.combinations(idx, 2):
        if sets[a] & sets[b] != core:
            return None
    return core


def sunflower_extract(sets: Sequence[Iterable[int]], k: int) -> tuple[frozenset, tuple[int, ...]] | None:
    """k indices whose sets pairwise meet in one common core.

    Up to 20 sets the search is exhaustive and returns the lexicographically
    least index tuple; past that, a greedy pass per candidate core.
    """
    sets = [frozenset(s) for s in sets]
    if k <= 0:
        return frozenset(), ()
    if len(sets) < k:
        return None
    if k == 1:
        return sets[0], (0,)
    if len(sets) <= 20:
        return _sunflower_exhaustive(sets, k)
    return _sunflower_greedy(sets, k)


def _sunflower_exhaustive(sets, k):
    n = len(sets)

    def grow(chosen, core, start):
        if len(chosen) == k:
            return chosen
        for j in range(start, n):
            s = sets[j]
            # the core is fixed by the first two petals
            c = sets[chosen[0]] & s if core is None else core
            if all(sets[i] & s == c for i in chosen):
                found = grow(chosen + (j,), c, j + 1)
                if found:
                    return found
        return None

    for i in range(n):
        found = grow((i,), None, i + 1)
        if found:
            return is_sunflower(sets, found), found
    return None


def _sunflower_greedy(sets, k):
    cores = sorted({sets[a] & sets[b] for a, b in itertools.combinations(range(len(sets)), 2)},
                   key=lambda c: (len(c), sorted(c)))
    for core in cores:
        chosen: list[int] = []
        used: set = set()
        for i, s in enumerate(sets):
            if core <= s and not (s - core) & used and all(sets[c] & s == core for c in chosen):
                chosen.append(i)
                used |= s - core
                if len(chosen) == k:
                    return core, tuple(chosen)
    return None
