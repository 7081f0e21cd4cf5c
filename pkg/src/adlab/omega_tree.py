"""Omega-trees with finite levels, subtrees, branches and height-increasing sequences.

Nodes are coded level-major: the root is 0, then level 1 left to right, and so
on.  ``tree.offset(n)`` is the code of the leftmost node of level n, so the
nodes of height ``< n`` are exactly the codes ``< tree.offset(n)``.
"""
from __future__ import annotations

import bisect
import random
from abc import ABC, abstractmethod
from typing import Callable, Iterable, Iterator, Sequence

from . import lazyset
from .errors import InsufficientDepth, NoBranchWithinFuel, TreeTruncated
from .lazyset import LazySet, eventually_periodic
from .verdict import Verdict, certified, violated


class OmegaTree(ABC):
    #: number of stored levels for truncated trees, None for unbounded ones
    depth_limit: int | None = None

    def __init__(self):
        self._offsets = [0]
        self._child_cache: dict[int, list[int]] = {}

    @abstractmethod
    def _width(self, n: int) -> int: ...

    @abstractmethod
    def _parent_index(self, n: int, i: int) -> int: ...

    def _check_level(self, n: int) -> None:
        if n < 0:
            raise ValueError("negative level")
        if self.depth_limit is not None and n >= self.depth_limit:
            raise TreeTruncated(f"level {n} beyond stored depth {self.depth_limit}")

    def level_width(self, n: int) -> int:
        self._check_level(n)
        return self._width(n)

    def parent_index(self, n: int, i: int) -> int:
        self._check_level(n)
        return self._parent_index(n, i)

    def child_indices(self, n: int, i: int) -> range | list[int]:
        """Indices at level n+1 of the children of node (n, i)."""
        starts = self._child_starts(n)
        return range(starts[i], starts[i + 1])

    def _child_starts(self, n: int) -> list[int]:
        # generic fallback: parents of level n+1 are assumed nondecreasing
        if n not in self._child_cache:
            w, w1 = self.level_width(n), self.level_width(n + 1)
            counts = [0] * w
            for j in range(w1):
                counts[self._parent_index(n + 1, j)] += 1
            starts = [0]
            for c in counts:
                starts.append(starts[-1] + c)
            self._child_cache[n] = starts
        return self._child_cache[n]

    def offset(self, n: int) -> int:
        while len(self._offsets) <= n:
            k = len(self._offsets) - 1
            self._offsets.append(self._offsets[-1] + self.level_width(k))
        return self._offsets[n]

    def code(self, n: int, i: int) -> int:
        return self.offset(n) + i

    def locate(self, code: int) -> tuple[int, int]:
        if code < 0:
            raise ValueError("negative node code")
        while self._offsets[-1] <= code:
            self.offset(len(self._offsets))
        n = bisect.bisect_right(self._offsets, code) - 1
        return n, code - self._offsets[n]

    def height(self, code: int) -> int:
        return self.locate(code)[0]

    def parent(self, code: int) -> int:
        n, i = self.locate(code)
        if n == 0:
            raise ValueError("the root has no parent")
        return self.code(n - 1, self._parent_index(n, i))

    def children(self, code: int) -> list[int]:
        n, i = self.locate(code)
        if self.depth_limit is not None and n + 1 >= self.depth_limit:
            return []
        base = self.offset(n + 1)
        return [base + j for j in self.child_indices(n, i)]

    def level_nodes(self, n: int) -> range:
        return range(self.offset(n), self.offset(n + 1))

    def ancestors(self, code: int) -> list[int]:
        """Root-to-node path, node included."""
        path = [code]
        while path[-1] != 0:
            path.append(self.parent(path[-1]))
        return path[::-1]

    def is_ancestor(self, a: int, b: int) -> bool:
        ha, hb = self.height(a), self.height(b)
        if ha > hb:
            return False
        while hb > ha:
            b = self.parent(b)
            hb -= 1
        return a == b

    @abstractmethod
    def to_json(self) -> dict: ...


class KaryTree(OmegaTree):
    """The full k-ary tree; node i of level n has children k*i .. k*i+k-1."""

    def __init__(self, k: int):
        super().__init__()
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k

    def _width(self, n):
        return self.k ** n

    def _parent_index(self, n, i):
        return i // self.k

    def child_indices(self, n, i):
        return range(self.k * i, self.k * i + self.k)

    def to_json(self):
        return {"kind": "full_kary", "k": self.k}


class LeveledTree(OmegaTree):
    """Explicit truncated tree: ``widths[n]`` nodes on level n and
    ``parents[n][i]`` the parent index of node i of level n (``parents[0]`` empty)."""

    def __init__(self, widths: Sequence[int], parents: Sequence[Sequence[int]]):
        super().__init__()
        self.widths = tuple(int(w) for w in widths)
        self.parents = tuple(tuple(int(p) for p in ps) for ps in parents)
        if len(self.parents) != len(self.widths):
            raise ValueError("need one parent list per level")
        self.depth_limit = len(self.widths)

    def _width(self, n):
        return self.widths[n]

    def _parent_index(self, n, i):
        return self.parents[n][i]

    def _child_starts(self, n):
        if n not in self._child_cache:
            w = self.level_width(n)
            kids: list[list[int]] = [[] for _ in range(w)]
            for j, p in enumerate(self.parents[n + 1]):
                if 0 <= p < w:
                    kids[p].append(j)
            self._child_cache[n] = kids
        return self._child_cache[n]

    def child_indices(self, n, i):
        if n + 1 >= self.depth_limit:
            return []
        return self._child_starts(n)[i]

    def to_json(self):
        return {"levels": list(self.widths), "parents": [list(p) for p in self.parents]}


class RandomTree(OmegaTree):
    """Unbounded seeded tree: every node has 1..branching children, level
    widths are capped at ``width_cap`` and children are laid out left to right
    in parent order.  Level n is derived from (seed, n) alone, so any level can
    be materialized reproducibly."""

    def __init__(self, seed: int, branching: int = 3, width_cap: int = 24):
        super().__init__()
        if branching < 1 or width_cap < 1:
            raise ValueError("branching and width_cap must be positive")
        self.seed, self.branching, self.width_cap = seed, branching, width_cap
        self._widths = [1]
        self._starts: list[list[int]] = []

    def _extend(self, n):
        while len(self._widths) <= n:
            k = len(self._widths) - 1
            w = self._widths[k]
            rng = random.Random(f"adlab-tree:{self.seed}:{k}")
            counts = [rng.randint(1, self.branching) for _ in range(w)]
            excess = sum(counts) - self.width_cap
            i = w - 1
            while excess > 0:
                take = min(excess, counts[i] - 1)
                counts[i] -= take
                excess -= take
                i -= 1
            starts = [0]
            for c in counts:
                starts.append(starts[-1] + c)
            self._starts.append(starts)
            self._widths.append(starts[-1])

    def _width(self, n):
        self._extend(n)
        return self._widths[n]

    def _parent_index(self, n, i):
        self._extend(n)
        return bisect.bisect_right(self._starts[n - 1], i) - 1

    def child_indices(self, n, i):
        self._extend(n + 1)
        s = self._starts[n]
        return range(s[i], s[i + 1])

    def to_json(self):
        return {"kind": "random", "seed": self.seed, "branching": self.branching,
                "width_cap": self.width_cap}

    def truncated(self, depth: int) -> LeveledTree:
        widths = [self.level_width(n) for n in range(depth)]
        parents = [[]] + [[self._parent_index(n, i) for i in range(widths[n])] for n in range(1, depth)]
        return LeveledTree(widths, parents)


class ProductTree(OmegaTree):
    """Tuples ``(t(0), ..., t(n-1))`` with ``t(k) < sizes[k]``, ordered by extension.

    Level n has ``prod(sizes[:n])`` nodes indexed in mixed radix with t(0) most
    significant, so left-to-right order is lexicographic.  Levels 0..len(sizes)
    are present.
    """

    def __init__(self, sizes: Sequence[int]):
        super().__init__()
        self.sizes = tuple(int(s) for s in sizes)
        self.depth_limit = len(self.sizes) + 1

    def _width(self, n):
        w = 1
        for s in self.sizes[:n]:
            w *= s
        return w

    def _parent_index(self, n, i):
        return i // self.sizes[n - 1]

    def child_indices(self, n, i):
        if n >= len(self.sizes):
            return range(0)
        s = self.sizes[n]
        return range(i * s, (i + 1) * s)

    def node_tuple(self, code: int) -> tuple[int, ...]:
        n, i = self.locate(code)
        out = []
        for k in reversed(range(n)):
            i, r = divmod(i, self.sizes[k])
            out.append(r)
        return tuple(reversed(out))

    def tuple_code(self, t: Sequence[int]) -> int:
        i = 0
        for k, x in enumerate(t):
            i = i * self.sizes[k] + x
        return self.code(len(t), i)

    def to_json(self):
        return {"kind": "product", "sizes": list(self.sizes)}


def tree_from_json(obj) -> OmegaTree:
    kind = obj.get("kind")
    if kind == "full_kary":
        return KaryTree(int(obj["k"]))
    if kind == "random":
        return RandomTree(int(obj["seed"]), int(obj.get("branching", 3)), int(obj.get("width_cap", 24)))
    if kind == "product":
        return ProductTree(obj["sizes"])
    if "levels" in obj:
        return LeveledTree(obj["levels"], obj["parents"])
    raise ValueError("unrecognized tree encoding")


def validate_tree(tree: OmegaTree, depth: int) -> Verdict:
    """Levels are finite and nonempty and parents are in range, for levels < depth."""
    if depth < 1:
        raise InsufficientDepth("depth must be at least 1")
    for n in range(depth):
        try:
            w = tree.level_width(n)
        except TreeTruncated:
            return violated(("level", n), "beyond stored truncation")
        if w < 1:
            return violated(("level", n), "empty level")
        if n == 0:
            if w != 1:
                return violated(("level", 0), "tree must have a single root")
            continue
        prev = tree.level_width(n - 1)
        for i in range(w):
            p = tree.parent_index(n, i)
            if not 0 <= p < prev:
                return violated(("node", n, i), "parent index out of range")
    return certified()


class Branch:
    """An infinite branch given by eventually periodic child choices.

    At level n the branch moves to child number ``choice(n) mod (#children)``
    of its current node (children ordered left to right).
    """

    def __init__(self, tree: OmegaTree, prefix: Sequence[int] = (), cycle: Sequence[int] = (0,)):
        self.tree = tree
        self.prefix, self.cycle = tuple(prefix), tuple(cycle)
        self._choice = eventually_periodic(self.prefix, self.cycle)
        self._nodes = [0]

    @classmethod
    def through(cls, tree: OmegaTree, node: int, cycle: Sequence[int] = (0,)) -> "Branch":
        """The branch passing through ``node`` and continuing by ``cycle``."""
        path = tree.ancestors(node)
        prefix = []
        for a, b in zip(path, path[1:]):
            prefix.append(tree.children(a).index(b))
        return cls(tree, prefix, cycle)

    def node_at(self, n: int) -> int:
        while len(self._nodes) <= n:
            k = len(self._nodes) - 1
            kids = self.tree.children(self._nodes[-1])
            if not kids:
                raise TreeTruncated(f"branch hits a leaf at level {k}")
            self._nodes.append(kids[self._choice(k) % len(kids)])
        return self._nodes[n]

    def prefix_nodes(self, d: int) -> tuple[int, ...]:
        return tuple(self.node_at(n) for n in range(d))

    def to_json(self):
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}


class Subtree(LazySet):
    """Nonempty downward-closed node set; also a LazySet over node codes."""

    universe = "tree"
    tree: OmegaTree
    witness_branch: Branch | None = None
    #: generator guarantee that every node of the subtree has a child in it
    guaranteed: bool = False

    @property
    def infinite(self):
        return self.witness_branch is not None or self.guaranteed

    def level_nodes(self, n: int) -> list[int]:
        return [c for c in self.tree.level_nodes(n) if c in self]

    def next_above(self, x):
        c = x + 1
        try:
            n = self.tree.height(c)
        except TreeTruncated:
            return None
        while True:
            try:
                level = self.level_nodes(n)
            except TreeTruncated:
                return None
            if not level:
                return None
            i = bisect.bisect_left(level, c)
            if i < len(level):
                return level[i]
            n += 1

    def nodes_from_height(self, h: int) -> Iterator[int]:
        return self.iter_from(self.tree.offset(h))


class BranchClosure(Subtree):
    def __init__(self, tree: OmegaTree, branch: Branch):
        self.tree = tree
        self.branch = branch
        self.witness_branch = branch

    def __contains__(self, x):
        return x >= 0 and self.branch.node_at(self.tree.height(x)) == x

    def level_nodes(self, n):
        return [self.branch.node_at(n)]

    def next_above(self, x):
        if x < 0:
            return 0
        b = self.branch.node_at(self.tree.height(x))
        return b if b > x else self.branch.node_at(self.tree.height(x) + 1)

    def to_json(self):
        return {"kind": "branch_closure", "branch": self.branch.to_json()}


class SubtreeUnion(Subtree):
    def __init__(self, tree: OmegaTree, parts: Iterable[Subtree]):
        self.tree = tree
        self.parts = tuple(parts)
        self.guaranteed = any(p.infinite for p in self.parts)

    def __contains__(self, x):
        return any(x in p for p in self.parts)

    def level_nodes(self, n):
        return sorted({c for p in self.parts for c in p.level_nodes(n)})

    def next_above(self, x):
        cands = [y for y in (p.next_above(x) for p in self.parts) if y is not None]
        return min(cands) if cands else None

    def to_json(self):
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


class FullSubtree(Subtree):
    def __init__(self, tree: OmegaTree):
        self.tree = tree
        self.guaranteed = True

    def __contains__(self, x):
        return x >= 0

    def level_nodes(self, n):
        return list(self.tree.level_nodes(n))

    def next_above(self, x):
        return x + 1

    def to_json(self):
        return {"kind": "full"}


class NodeSubtree(Subtree):
    """A finite subtree listed explicitly (nodes of height < depth)."""

    def __init__(self, tree: OmegaTree, nodes: Iterable[int], depth: int | None = None):
        self.tree = tree
        self.nodes = tuple(sorted(set(nodes)))
        self.depth = depth

    def __contains__(self, x):
        i = bisect.bisect_left(self.nodes, x)
        return i < len(self.nodes) and self.nodes[i] == x

    def level_nodes(self, n):
        lo, hi = self.tree.offset(n), self.tree.offset(n + 1)
        return list(self.nodes[bisect.bisect_left(self.nodes, lo):bisect.bisect_left(self.nodes, hi)])

    def next_above(self, x):
        i = bisect.bisect_right(self.nodes, x)
        return self.nodes[i] if i < len(self.nodes) else None

    def to_json(self):
        return {"kind": "nodes", "nodes": list(self.nodes), "depth": self.depth}


class PredicateSubtree(Subtree):
    """Subtree given by a membership test and a per-level node lister."""

    def __init__(self, tree: OmegaTree, contains: Callable[[int], bool],
                 level_lister: Callable[[int], list[int]], guaranteed: bool = False):
        self.tree = tree
        self._contains = contains
        self._lister = level_lister
        self.guaranteed = guaranteed

    def __contains__(self, x):
        return x >= 0 and self._contains(x)

    def level_nodes(self, n):
        return self._lister(n)


def _decode_subtree_union(obj, tree):
    parts = [lazyset.from_json(p, tree) for p in obj["parts"]]
    if tree is not None and parts and all(isinstance(p, Subtree) for p in parts):
        return SubtreeUnion(tree, parts)
    return lazyset.Union(tuple(parts))


def _need_tree(tree):
    if tree is None:
        raise ValueError("subtree encodings need a tree")
    return tree


lazyset.DECODERS.update({
    "branch_closure": lambda o, t: BranchClosure(
        _need_tree(t), Branch(t, o["branch"].get("prefix", ()), o["branch"].get("cycle", (0,)))),
    "union": _decode_subtree_union,
    "full": lambda o, t: FullSubtree(_need_tree(t)),
    "nodes": lambda o, t: NodeSubtree(_need_tree(t), o["nodes"], o.get("depth")),
})


def validate_subtree(s: Subtree, depth: int) -> Verdict:
    """Root membership and downward closure at heights < depth."""
    if 0 not in s:
        return violated(0, "root missing")
    for n in range(1, depth):
        for c in s.level_nodes(n):
            if s.tree.parent(c) not in s:
                return violated(c, "not downward closed")
    return certified()


def ad_check_subtrees(s: Subtree, r: Subtree, height_bound: int, depth: int) -> Verdict:
    """No common node at heights in ``[height_bound, depth)``; reports the least one."""
    if depth < height_bound:
        raise InsufficientDepth("depth below height bound")
    for n in range(height_bound, depth):
        common = set(s.level_nodes(n)).intersection(r.level_nodes(n))
        if common:
            return violated(min(common))
    return certified()


def branch_of(s: Subtree, depth: int, fuel: int = 100_000) -> tuple[int, ...]:
    """A root path of length ``depth`` inside ``s`` (König's lemma, executably).

    Uses the subtree's designated branch when it has one; otherwise the
    leftmost path surviving a depth-``depth`` lookahead, found by backtracking.
    """
    if s.witness_branch is not None:
        return s.witness_branch.prefix_nodes(depth)
    if depth == 0:
        return ()
    if 0 not in s:
        raise NoBranchWithinFuel("root not in subtree")
    tree = s.tree
    path = [0]
    # stack[k] iterates the untried children of path[k]
    stack = [iter([c for c in tree.children(0) if c in s])]
    spent = 0
    while len(path) < depth:
        spent += 1
        if spent > fuel:
            raise NoBranchWithinFuel(f"no path of length {depth} within fuel")
        nxt = next(stack[-1], None)
        if nxt is None:
            path.pop()
            stack.pop()
            if not path:
                raise NoBranchWithinFuel(f"subtree has no path of length {depth}")
            continue
        path.append(nxt)
        if len(path) < depth:
            try:
                kids = tree.children(nxt)
            except TreeTruncated:
                kids = []
            stack.append(iter([c for c in kids if c in s]))
    return tuple(path)


def is_inc_seq(tree: OmegaTree, seq: Sequence[int]) -> bool:
    hs = [tree.height(c) for c in seq]
    return all(a < b for a, b in zip(hs, hs[1:]))


def enumerate_inc_seqs(tree: OmegaTree, max_len: int, depth: int) -> list[tuple[int, ...]]:
    """All height-increasing sequences of nodes of height < depth, length <= max_len.

    Ordered by length, then lexicographically by node code.
    """
    out: list[tuple[int, ...]] = [()]
    if max_len <= 0:
        return out
    limit = tree.offset(depth) if depth > 0 else 0
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for seq in layer:
            start = tree.offset(tree.height(seq[-1]) + 1) if seq else 0
            nxt.extend(seq + (c,) for c in range(start, limit))
        if not nxt:
            break
        out.extend(nxt)
        layer = nxt
    return out
