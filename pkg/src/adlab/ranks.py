"""Rank recursion on a finite truncation of the tree.

Stems are height-increasing node sequences below a depth.  For a label l,
rank 0 marks the base stems B_l, and a stem gets rank r+1 once at least
``theta`` of its successors (one-node extensions avoiding the finite family
R) have rank <= r.  ``theta`` stands in for "infinitely many"; stems that
never enter get rank None (infinity).
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .omega_tree import OmegaTree, enumerate_inc_seqs, is_inc_seq
from .verdict import Verdict, certified, violated

Stem = tuple[int, ...]
Rank = int | None


@dataclass
class RankInstance:
    tree: OmegaTree
    depth: int
    avoided: Sequence[frozenset[int]] = ()
    bases: Mapping[Hashable, frozenset[Stem]] = field(default_factory=dict)
    theta: int = 2

    def __post_init__(self):
        if self.depth < 0 or self.theta < 1:
            raise ValueError("depth must be >= 0 and theta >= 1")
        self.avoided = tuple(frozenset(a) for a in self.avoided)
        self.bases = {l: frozenset(tuple(s) for s in b) for l, b in self.bases.items()}
        self._blocked = frozenset().union(*self.avoided) if self.avoided else frozenset()
        self._stems = None

    @property
    def blocked(self) -> frozenset[int]:
        return self._blocked

    @property
    def stems(self) -> list[Stem]:
        if self._stems is None:
            self._stems = enumerate_inc_seqs(self.tree, self.depth, self.depth)
        return self._stems

    @property
    def limit(self) -> int:
        """First node code at or beyond the truncation."""
        return self.tree.offset(self.depth) if self.depth else 0


def validate_instance(inst: RankInstance) -> Verdict:
    for l, base in inst.bases.items():
        for s in sorted(base):
            if not is_inc_seq(inst.tree, s) or any(c >= inst.limit for c in s):
                return violated((l, s), "base stem is not a height-increasing sequence in the truncation")
    return certified()


def successors_R(eta: Sequence[int], inst: RankInstance, d: int | None = None) -> list[Stem]:
    """One-node extensions of eta by nodes of height < d outside the avoided sets."""
    d = inst.depth if d is None else d
    eta = tuple(eta)
    start = inst.tree.offset(inst.tree.height(eta[-1]) + 1) if eta else 0
    stop = inst.tree.offset(d) if d > 0 else 0
    return [eta + (t,) for t in range(start, stop) if t not in inst.blocked]


@dataclass
class RankTable:
    inst: RankInstance
    ranks: dict[Hashable, dict[Stem, Rank]]

    def rank(self, label, eta: Sequence[int]) -> Rank:
        return self.ranks[label].get(tuple(eta))

    def to_json(self) -> list[dict]:
        return [{"label": l, "ranks": [[list(s), r] for s, r in sorted(tab.items(), key=lambda kv: (len(kv[0]), kv[0]))]}
                for l, tab in self.ranks.items()]


def compute_ranks(inst: RankInstance) -> RankTable:
    """Least fixed point by saturation: each stage pushes counts to parents."""
    out = {}
    for l, base in inst.bases.items():
        rank: dict[Stem, Rank] = {s: None for s in inst.stems}
        frontier = sorted(s for s in base if s in rank)
        counts = Counter()
        r = 0
        while frontier:
            for s in frontier:
                rank[s] = r
            touched = set()
            for s in frontier:
                if s and s[-1] not in inst.blocked:
                    counts[s[:-1]] += 1
                    touched.add(s[:-1])
            frontier = sorted(p for p in touched if rank[p] is None and counts[p] >= inst.theta)
            r += 1
        out[l] = rank
    return RankTable(inst, out)


def check_table(table: RankTable) -> Verdict:
    """Rank 0 exactly on the base; rank r > 0 has >= theta successors ranked below r."""
    inst = table.inst
    for l, tab in table.ranks.items():
        base = inst.bases[l]
        for s, r in tab.items():
            if (r == 0) != (s in base):
                return violated((l, s), "rank 0 must coincide with the base")
            if r:
                lower = sum(1 for c in successors_R(s, inst) if (tab[c] is not None and tab[c] < r))
                if lower < inst.theta:
                    return violated((l, s), f"only {lower} successors of smaller rank")
    return certified()


def approx_D_eta_i(table: RankTable, eta: Sequence[int], i: int) -> set:
    """Labels l with a successor of eta at height >= i of finite l-rank."""
    inst = table.inst
    if i >= inst.depth:
        return set()
    succ = [c for c in successors_R(eta, inst) if inst.tree.height(c[-1]) >= i]
    return {l for l, tab in table.ranks.items() if any(tab[c] is not None for c in succ)}


@dataclass
class RankFacts:
    finite_rank: list[dict]
    thinning: list[dict]

    @property
    def ok(self) -> bool:
        return not any(e["missing"] for e in self.finite_rank) and all(e["ok"] for e in self.thinning)


def check_rank_facts(inst: RankInstance, table: RankTable,
                     thinning: Sequence[Sequence[Iterable[int]]] = ()) -> RankFacts:
    """Finitary checks of two rank facts.

    For a stem of finite l-rank, l lies in D(eta, i) for every i up to
    ``i_max``, the largest height of a finitely ranked successor (stems with
    none are reported with ``i_max=None``).  For 0 < rank < infinity, count
    the thinning families whose union swallows every rank-lowering successor
    node; when the unions pairwise share fewer nodes than there are such
    successors, at most one family may do so.
    """
    unions = [frozenset().union(*map(frozenset, fam)) if fam else frozenset() for fam in thinning]
    overlap = max((len(a & b) for a, b in itertools.combinations(unions, 2)), default=0)
    facts1, facts2 = [], []
    for l, tab in table.ranks.items():
        for eta, r in tab.items():
            if r is None:
                continue
            succ = successors_R(eta, inst)
            ranked = [c for c in succ if tab[c] is not None]
            i_max = max((inst.tree.height(c[-1]) for c in ranked), default=None)
            missing = []
            if i_max is not None:
                missing = [i for i in range(i_max + 1) if l not in approx_D_eta_i(table, eta, i)]
            facts1.append({"label": l, "stem": eta, "rank": r, "i_max": i_max, "missing": missing})
            if r > 0 and unions:
                lowering = {c[-1] for c in succ if tab[c] is not None and tab[c] < r}
                bad = [b for b, u in enumerate(unions) if lowering <= u]
                applicable = overlap < len(lowering)
                facts2.append({"label": l, "stem": eta, "rank": r, "lowering": len(lowering),
                               "bad": bad, "applicable": applicable,
                               "ok": not applicable or len(bad) <= 1})
    return RankFacts(facts1, facts2)
