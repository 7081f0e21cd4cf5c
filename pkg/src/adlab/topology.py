"""Finite second-countable spaces: leveled bases, tree encodings, diagonals.

Points are ``0..n-1``.  The topology is generated by the listed base as a
subbase (finite intersections are basic), and closure is the complement of
the union of basic sets missing the argument.  ``base[0]`` must be the whole
space.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import CoverGap, TreeTruncated
from .lazyset import LazySet, ModulusFunction
from .omega_tree import Branch, BranchClosure, OmegaTree, PredicateSubtree, ProductTree, Subtree
from .verdict import Verdict, certified, violated

Pair = tuple[frozenset[int], frozenset[int]]


class Space:
    def __init__(self, n: int, base: Sequence[Iterable[int]],
                 urysohn_pairs: Sequence[tuple[Iterable[int], Iterable[int]]] = (),
                 fsigma: Mapping[int, Sequence[Iterable[int]]] | None = None):
        if n < 0:
            raise ValueError("point count must be non-negative")
        self.n = n
        self.base = tuple(frozenset(b) for b in base)
        self.urysohn_pairs = tuple((frozenset(u), frozenset(v)) for u, v in urysohn_pairs)
        self.fsigma = {int(k): [frozenset(f) for f in fs] for k, fs in (fsigma or {}).items()}

    @cached_property
    def points(self) -> frozenset[int]:
        return frozenset(range(self.n))

    @cached_property
    def basics(self) -> tuple[frozenset[int], ...]:
        """Intersection closure of the base, smallest sets first."""
        seen = set(self.base) | {self.points}
        frontier = list(seen)
        while frontier:
            new = []
            for a in frontier:
                for b in self.base:
                    c = a & b
                    if c not in seen:
                        seen.add(c)
                        new.append(c)
            frontier = new
        return tuple(sorted(seen, key=lambda s: (len(s), sorted(s))))

    def interior(self, S: Iterable[int]) -> frozenset[int]:
        S = frozenset(S)
        return frozenset().union(*(b for b in self.basics if b <= S))

    def is_open(self, S: Iterable[int]) -> bool:
        S = frozenset(S)
        return self.interior(S) == S

    def closure(self, S: Iterable[int]) -> frozenset[int]:
        S = frozenset(S)
        return self.points - frozenset().union(*(b for b in self.basics if not b & S))

    def opens(self) -> list[frozenset[int]]:
        """Every open set (unions of basics); exponential, for small spaces."""
        seen = {frozenset()}
        for b in self.basics:
            seen |= {s | b for s in seen}
        return sorted(seen, key=lambda s: (len(s), sorted(s)))

    def to_json(self) -> dict:
        out = {"points": self.n, "base": [sorted(b) for b in self.base]}
        if self.urysohn_pairs:
            out["urysohn_pairs"] = [[sorted(u), sorted(v)] for u, v in self.urysohn_pairs]
        if self.fsigma:
            out["fsigma"] = {str(k): [sorted(f) for f in fs] for k, fs in sorted(self.fsigma.items())}
        return out

    @classmethod
    def from_json(cls, obj) -> "Space":
        return cls(int(obj["points"]), obj["base"], obj.get("urysohn_pairs", ()), obj.get("fsigma"))


def validate_space(sp: Space) -> Verdict:
    if not sp.base or sp.base[0] != sp.points:
        return violated(("base0", None), "base[0] must be the whole space")
    for i, b in enumerate(sp.base):
        if not b <= sp.points:
            return violated(("range", i), "base set mentions a point outside the space")
    return certified()


def closure(sp: Space, S: Iterable[int]) -> frozenset[int]:
    return sp.closure(S)


def check_urysohn_witness(sp: Space, pairs: Sequence[Pair]) -> Verdict:
    """Open pairs with disjoint closures covering every ordered pair of distinct points."""
    pairs = [(frozenset(u), frozenset(v)) for u, v in pairs]
    for k, (u, v) in enumerate(pairs):
        if not (sp.is_open(u) and sp.is_open(v)):
            return violated(("not_open", k), "pair member is not open")
        common = sp.closure(u) & sp.closure(v)
        if common:
            return violated(("closures", k), f"closures share point {min(common)}")
    for x, y in itertools.permutations(range(sp.n), 2):
        if not any(x in u and y in v for u, v in pairs):
            return violated(("uncovered", (x, y)), "ordered pair not covered")
    return certified()


def witness_index(pairs: Sequence[Pair], x: int, y: int) -> int | None:
    """Least k whose pair separates x and y in either orientation."""
    for k, (u, v) in enumerate(pairs):
        if (x in u and y in v) or (y in u and x in v):
            return k
    return None


def find_urysohn_witness(sp: Space, limit: int = 64) -> list[Pair] | None:
    """Greedy cover of ordered pairs by (U, V) with U open and V the largest
    open set whose closure misses cl(U).  None when no witness exists."""
    cands = []
    for u in sp.opens():
        if not u:
            continue
        cu = sp.closure(u)
        v = sp.interior(sp.points - cu)
        if v and not sp.closure(v) & cu:
            cands.append((u, v))
    todo = set(itertools.permutations(range(sp.n), 2))
    out = []
    while todo and len(out) < limit:
        best, gain = None, 0
        for u, v in cands:
            g = sum(1 for x in u for y in v if (x, y) in todo)
            if g > gain:
                best, gain = (u, v), g
        if best is None:
            return None
        out.append(best)
        todo -= {(x, y) for x in best[0] for y in best[1]}
    return out if not todo else None


@dataclass
class LeveledBase:
    levels: list[list[frozenset[int]]]
    #: per member: (m, eps) with eps read as bits, eps(k) = bit k
    labels: list[list[tuple[int, int]]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"levels": [[sorted(b) for b in lvl] for lvl in self.levels],
                "labels": [[list(l) for l in lvl] for lvl in self.labels]}

    @classmethod
    def from_json(cls, obj) -> "LeveledBase":
        return cls([[frozenset(b) for b in lvl] for lvl in obj["levels"]],
                   [[tuple(l) for l in lvl] for lvl in obj.get("labels", [])])


def build_leveled_base(sp: Space, pairs: Sequence[Pair], levels: int | None = None) -> LeveledBase:
    """Level n lists ``G_m & C_0^e(0) & ... & C_n^e(n)`` for m <= n (outer)
    and e over 2^(n+1) in counter order, where C_k^0 = X - cl(U_k) and
    C_k^1 = X - cl(V_k).  Duplicates are kept."""
    v = check_urysohn_witness(sp, pairs)
    if not v:
        raise ValueError(f"pairs are not a Urysohn witness: {v.witness}")
    levels = len(pairs) if levels is None else levels
    if levels > len(pairs):
        raise ValueError(f"{levels} levels need {levels} pairs, only {len(pairs)} given")
    C = [(sp.points - sp.closure(u), sp.points - sp.closure(v)) for u, v in pairs]
    out, labels = [], []
    for n in range(levels):
        lvl, lab = [], []
        for m in range(min(n, len(sp.base) - 1) + 1):
            for e in range(1 << (n + 1)):
                s = sp.base[m]
                for k in range(n + 1):
                    s = s & C[k][e >> k & 1]
                lvl.append(s)
                lab.append((m, e))
        out.append(lvl)
        labels.append(lab)
    return LeveledBase(out, labels)


@dataclass
class LeveledReport:
    opens: Verdict
    finite: Verdict
    common_closure: Verdict
    neighborhoods: Verdict
    covers: Verdict
    cutoffs: dict[tuple[int, int], int]

    @property
    def ok(self) -> bool:
        return all((self.opens, self.finite, self.common_closure, self.neighborhoods, self.covers))


def verify_leveled_base(sp: Space, lb: LeveledBase, pairs: Sequence[Pair] | None = None) -> LeveledReport:
    """Check the five leveled-base properties on the presented levels.

    (iii) reports per pair of points the cutoff (one past the last level with
    a member whose closure holds both); with ``pairs`` the cutoff must not
    exceed the pair's witness index.  (iv) is checked for basic
    neighbourhoods G_j: from level j on (if presented) every level has a
    member B with x in B inside G_j.
    """
    L = len(lb.levels)
    opens = certified()
    for n, lvl in enumerate(lb.levels):
        for i, b in enumerate(lvl):
            if not sp.is_open(b):
                opens = violated((n, i), "level member is not open")
                break
        if not opens:
            break
    finite = certified()

    closures = [[sp.closure(b) for b in lvl] for lvl in lb.levels]
    cutoffs = {}
    common = certified()
    for x, y in itertools.combinations(range(sp.n), 2):
        hit = [n for n in range(L) if any(x in c and y in c for c in closures[n])]
        cutoffs[(x, y)] = hit[-1] + 1 if hit else 0
        if pairs is not None and common:
            k = witness_index(pairs, x, y)
            if k is None or cutoffs[(x, y)] > k:
                common = violated((x, y), f"common closures up to level {cutoffs[(x, y)] - 1}")

    nbhd = certified()
    for x in range(sp.n):
        for j, g in enumerate(sp.base):
            if x not in g or j >= L:
                continue
            for n in range(j, L):
                if not any(x in b and b <= g for b in lb.levels[n]):
                    nbhd = violated((x, j, n), "no level member between x and the basic set")
                    break
            if not nbhd:
                break
        if not nbhd:
            break

    covers = certified()
    for n, lvl in enumerate(lb.levels):
        gap = sp.points - frozenset().union(*lvl)
        if gap:
            covers = violated((n, min(gap)), "level does not cover the space")
            break
    return LeveledReport(opens, finite, common, nbhd, covers, cutoffs)


@dataclass
class Encoding:
    """The tree of finite sequences through the levels and the subtrees T_x."""

    space: Space
    lb: LeveledBase
    tree: ProductTree
    subtrees: dict[int, Subtree]
    bounds: dict[tuple[int, int], int]

    def O(self, t: int) -> frozenset[int]:
        """Points in every set along node t (all points at the root)."""
        return self._O(t)

    @cached_property
    def _O(self):
        @lru_cache(maxsize=None)
        def O(t):
            if t == 0:
                return self.space.points
            n, _ = self.tree.locate(t)
            return O(self.tree.parent(t)) & self.lb.levels[n - 1][self.tree.node_tuple(t)[-1]]
        return O

    @property
    def height(self) -> int:
        return len(self.lb.levels)

    def nodes_of(self, x: int, from_level: int = 0) -> list[int]:
        s = self.subtrees[x]
        return [c for n in range(from_level, self.height + 1) for c in s.level_nodes(n)]

    def to_json(self) -> dict:
        return {"tree": self.tree.to_json(),
                "subtrees": {str(x): {"levels": [s.level_nodes(n) for n in range(self.height + 1)]}
                             for x, s in sorted(self.subtrees.items())},
                "bounds": [[x, y, b] for (x, y), b in sorted(self.bounds.items())]}


def _tx(tree: ProductTree, lb: LeveledBase, x: int) -> PredicateSubtree:
    members = [[i for i, b in enumerate(lvl) if x in b] for lvl in lb.levels]
    allowed = [frozenset(m) for m in members]

    def contains(code):
        try:
            t = tree.node_tuple(code)
        except TreeTruncated:
            return False
        return all(t[k] in allowed[k] for k in range(len(t)))

    @lru_cache(maxsize=None)
    def lister(n):
        if n >= tree.depth_limit:
            raise TreeTruncated(f"level {n} beyond the encoding")
        return sorted(tree.tuple_code(t) for t in itertools.product(*members[:n]))

    return PredicateSubtree(tree, contains, lister)


def encode_tree(sp: Space, lb: LeveledBase, pairs: Sequence[Pair] | None = None) -> Encoding:
    """T = sequences t with t(k) a member index of level k; T_x = sequences
    whose every set contains x.  With ``pairs``, the AD height bound for
    T_x, T_y is the pair's witness index + 1."""
    tree = ProductTree([len(lvl) for lvl in lb.levels])
    subtrees = {x: _tx(tree, lb, x) for x in range(sp.n)}
    bounds = {}
    if pairs is not None:
        for x, y in itertools.combinations(range(sp.n), 2):
            k = witness_index(pairs, x, y)
            bounds[(x, y)] = (len(lb.levels) if k is None else k) + 1
    return Encoding(sp, lb, tree, subtrees, bounds)


def separator_for(enc: Encoding, A: Iterable[int]) -> frozenset[int]:
    """Nodes of T_x (x in A) at heights clearing every AD bound against points outside A."""
    A = frozenset(A)
    out = set()
    for x in sorted(A):
        b = max((enc.bounds[tuple(sorted((x, y)))] for y in range(enc.space.n) if y not in A), default=0)
        out.update(enc.nodes_of(x, b))
    return frozenset(out)


@dataclass
class GdeltaResult:
    verdict: Verdict
    W: dict[frozenset[int], frozenset[int]]
    intersection: frozenset[int]


def gdelta_from_separator(enc: Encoding, D: Iterable[int], A: Iterable[int], tau: int = 1) -> GdeltaResult:
    """Intersect ``W_F`` (union of O_t over t in D - F) over all F in D with |F| < tau.

    D is finite here, so F = D itself would empty the intersection; tau
    caps the finite exceptions instead.  Certified iff the result is A.
    """
    D = sorted(set(D))
    A = frozenset(A)
    W = {}
    for size in range(min(tau, len(D) + 1)):
        for F in itertools.combinations(D, size):
            Fs = frozenset(F)
            W[Fs] = frozenset().union(*(enc.O(t) for t in D if t not in Fs))
    inter = frozenset.intersection(*W.values()) if W else enc.space.points
    if inter == A:
        return GdeltaResult(certified(), W, inter)
    return GdeltaResult(violated(min(inter ^ A), "intersection differs from A"), W, inter)


# ---- branch spaces ----------------------------------------------------------

@dataclass
class BranchSpace:
    """Members H (branch closures) followed by Z, with basic sets [F]."""

    tree: OmegaTree
    members: list[LazySet]
    n_branches: int
    depth: int

    def basic(self, F: Iterable[int]) -> frozenset[int]:
        F = list(F)
        return frozenset(i for i, A in enumerate(self.members) if all(t in A for t in F))

    def open_set(self, U: Sequence[Iterable[int]]) -> frozenset[int]:
        return frozenset().union(*(self.basic(F) for F in U))

    def t1_check(self) -> Verdict:
        """Each ordered pair (A, A') has t in A - A' below depth."""
        limit = self.tree.offset(self.depth)
        for i, j in itertools.permutations(range(len(self.members)), 2):
            A, B = self.members[i], self.members[j]
            if not any(t not in B for t in A.elements_below(limit)):
                return violated((i, j), "no node separates the members")
        return certified()


def branch_space(tree: OmegaTree, H: Sequence[Branch], Z: Sequence[LazySet], d: int) -> BranchSpace:
    return BranchSpace(tree, [BranchClosure(tree, b) for b in H] + list(Z), len(H), d)


@dataclass
class BoundSeparator:
    D: frozenset[int]
    f: dict[int, list[int]]
    dominated: dict[int, bool]
    z_cutoff: dict[int, int | None]


def separator_from_bound(space: BranchSpace, U: Sequence[Sequence[Iterable[int]]],
                         g: ModulusFunction, d: int) -> BoundSeparator:
    """D = nodes t with ht(t) = g(n) and [{t}] inside U_n for some n < d.

    f[b][n] is the least height m from which every node of branch b, up to
    the horizon g(d-1), has [{t}] inside U_n.  ``dominated[b]`` reports
    f_b(n) <= g(n) for n from the modulus on.  ``z_cutoff[z]`` is the first
    n with Z outside U_n.
    """
    N = min(d, len(U))
    opens = [space.open_set(u) for u in U[:N]]
    for n in range(1, N):
        if not opens[n] <= opens[n - 1]:
            raise ValueError(f"open sets must decrease: U_{n} is not inside U_{n - 1}")
    gs = [g(n) for n in range(N)]
    if any(a >= b for a, b in zip(gs, gs[1:])):
        raise ValueError("g must be strictly increasing")
    tree = space.tree
    D = set()
    for n in range(N):
        for t in tree.level_nodes(gs[n]):
            if space.basic([t]) <= opens[n]:
                D.add(t)
    horizon = gs[-1] + 1 if gs else 0
    f, dom = {}, {}
    for b in range(space.n_branches):
        branch = space.members[b].branch
        ok_at = [[space.basic([branch.node_at(h)]) <= opens[n] for h in range(horizon)] for n in range(N)]
        fb = []
        for n in range(N):
            m = horizon
            while m > 0 and ok_at[n][m - 1]:
                m -= 1
            fb.append(m)
        f[b] = fb
        dom[b] = all(fb[n] <= gs[n] for n in range(g.modulus, N))
    z_cut = {}
    for z in range(space.n_branches, len(space.members)):
        z_cut[z] = next((n for n in range(N) if z not in opens[n]), None)
    return BoundSeparator(frozenset(D), f, dom, z_cut)


# ---- diagonals and covers ---------------------------------------------------

def diagonal(sp: Space) -> frozenset[tuple[int, int]]:
    return frozenset((x, x) for x in range(sp.n))


def squares(sets: Iterable[frozenset[int]]) -> frozenset[tuple[int, int]]:
    return frozenset((a, b) for s in sets for a in s for b in s)


@dataclass
class DiagonalWitness:
    W: list[frozenset[tuple[int, int]]]

    def at(self, n: int) -> frozenset[tuple[int, int]]:
        """W_n, repeating the last presented set beyond the list."""
        return self.W[min(n, len(self.W) - 1)]


def check_diagonal_witness(sp: Space, w: DiagonalWitness) -> Verdict:
    delta = diagonal(sp)
    for n, wn in enumerate(w.W):
        if not delta <= wn:
            return violated(("diagonal", n), "W_n misses the diagonal")
        if n and not wn <= w.W[n - 1]:
            return violated(("decreasing", n), "W_n is not inside W_(n-1)")
    if w.W and w.W[-1] != delta:
        return violated(("intersection", min(w.W[-1] - delta)), "intersection exceeds the diagonal")
    return certified()


def urysohn_diagonal(sp: Space, lb: LeveledBase) -> tuple[DiagonalWitness, Verdict]:
    """W_n = union of U x U over level n, made decreasing by running intersection."""
    W = []
    cur = None
    for lvl in lb.levels:
        sq = squares(lvl)
        cur = sq if cur is None else cur & sq
        W.append(cur)
    w = DiagonalWitness(W)
    return w, check_diagonal_witness(sp, w)


def diagonal_covers(sp: Space, w: DiagonalWitness, levels: int | None = None
                    ) -> tuple[list[list[frozenset[int]]], Verdict]:
    """Per n, the base sets G with G x G inside W_n; the verdict names the
    first (n, point) left uncovered."""
    levels = len(w.W) if levels is None else levels
    covers = []
    verdict = certified()
    for n in range(levels):
        wn = w.at(n)
        cov = [g for g in sp.base if all((a, b) in wn for a in g for b in g)]
        covers.append(cov)
        gap = sp.points - frozenset().union(*cov)
        if gap and verdict:
            verdict = violated((n, min(gap)), "cover misses a point")
    return covers, verdict


def select_cover(Y: Sequence[int], covers: Sequence[Sequence[frozenset[int]]], rounds: int) -> list[frozenset[int]]:
    """Round n serves y = Y[n mod |Y|] with the least-indexed member of
    covers[n] containing it (the last cover repeats past the list)."""
    out = []
    for n in range(rounds):
        y = Y[n % len(Y)]
        cov = covers[min(n, len(covers) - 1)] if covers else []
        pick = next((u for u in cov if y in u), None)
        if pick is None:
            raise CoverGap(n, y)
        out.append(frozenset(pick))
    return out


def h_sets(V: Sequence[frozenset[int]], x: int) -> frozenset[int]:
    return frozenset(n for n, v in enumerate(V) if x in v)


def first_separation(w: DiagonalWitness, x: int, y: int) -> int | None:
    return next((n for n, wn in enumerate(w.W) if (x, y) not in wn), None)


@dataclass
class NetworkReport:
    valid: Verdict
    covers: list[tuple[int, frozenset[int], tuple[frozenset[int], frozenset[int]]]]
    separation: Verdict
    diagonal: Verdict


def closed_network_diagonal(sp: Space, fsigma: Mapping[int, Sequence[Iterable[int]]] | None = None) -> NetworkReport:
    """Covers {B, X - F} for closed F inside base set B, with B the union of its F's.

    Each pair of distinct points needs one cover with no member holding both;
    the diagonal is then the intersection of the unions of squares.
    """
    fsigma = sp.fsigma if fsigma is None else {int(k): [frozenset(f) for f in v] for k, v in fsigma.items()}
    covers = []
    for j, Fs in sorted(fsigma.items()):
        B = sp.base[j]
        for F in Fs:
            if sp.closure(F) != F:
                return NetworkReport(violated(("not_closed", j, tuple(sorted(F))), "F is not closed"),
                                     [], violated(None), violated(None))
        if frozenset().union(*Fs) != B:
            return NetworkReport(violated(("union", j), "closed sets do not union to the base set"),
                                 [], violated(None), violated(None))
        covers.extend((j, F, (B, sp.points - F)) for F in Fs)
    sep = certified()
    for x, y in itertools.combinations(range(sp.n), 2):
        if not any(all(not (x in u and y in u) for u in pair) for _, _, pair in covers):
            sep = violated((x, y), "no cover separates the points")
            break
    inter = frozenset(itertools.product(range(sp.n), repeat=2))
    for _, _, pair in covers:
        inter &= squares(pair)
    diag = certified() if inter == diagonal(sp) else violated(min(inter - diagonal(sp)), "diagonal formula fails")
    return NetworkReport(certified(), covers, sep, diag)
