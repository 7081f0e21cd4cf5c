"""Seeded instance generators shared by the CLI and the tests.

Every generator takes an explicit ``random.Random`` or a seed; nothing reads
the clock or the environment.
"""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from .lazyset import AdFamily, Arith, Patched, Poly, Union, eventually_periodic
from .omega_tree import (Branch, BranchClosure, LeveledTree, OmegaTree, RandomTree, SubtreeUnion,
                         enumerate_inc_seqs)
from .ranks import RankInstance
from .separation import SeparationInstance, canonical_ad_family
from .topology import Space, check_urysohn_witness, find_urysohn_witness

#: heights by which distinct generated branches must have split
DIVERGE_BY = 30


def make_rng(seed: int, tag: str) -> random.Random:
    return random.Random(f"adlab-{tag}:{seed}")


# ---- trees and families -----------------------------------------------------

def random_tree(seed: int, branching: int = 3, width_cap: int = 24) -> RandomTree:
    return RandomTree(seed, branching, width_cap)


def divergence_height(a: Branch, b: Branch, horizon: int = DIVERGE_BY) -> int | None:
    """First height below ``horizon`` where the branches differ."""
    for h in range(horizon):
        if a.node_at(h) != b.node_at(h):
            return h
    return None


def random_branch(rng: random.Random, tree: OmegaTree, branching: int) -> Branch:
    prefix = [rng.randrange(branching) for _ in range(rng.randrange(2, 8))]
    cycle = [rng.randrange(branching) for _ in range(rng.randrange(1, 4))]
    return Branch(tree, prefix, cycle)


def random_tree_family(seed: int, members: int = 6, branching: int = 3, targets: int = 2,
                       union_rate: float = 0.3, width_cap: int = 24) -> SeparationInstance:
    """Branch closures (some members unions of two) split by height DIVERGE_BY,
    with promised pair bounds ``offset(split height)``."""
    rng = make_rng(seed, "tree-family")
    tree = random_tree(seed, branching, width_cap)
    pieces: list[list[Branch]] = []
    used: list[Branch] = []
    tries = 0
    while len(pieces) < members:
        tries += 1
        if tries > 1000 * members:
            raise ValueError("could not place diverging branches; widen the tree")
        k = 2 if rng.random() < union_rate else 1
        cand = [random_branch(rng, tree, branching) for _ in range(k)]
        group = list(used)
        ok = True
        for b in cand:
            if any(divergence_height(b, c) is None for c in group):
                ok = False
                break
            group.append(b)
        if ok:
            used.extend(cand)
            pieces.append(cand)
    mems = []
    for p in pieces:
        parts = [BranchClosure(tree, b) for b in p]
        mems.append(parts[0] if len(parts) == 1 else SubtreeUnion(tree, parts))
    bounds = {}
    for i, j in combinations(range(members), 2):
        h = max(divergence_height(a, b) for a in pieces[i] for b in pieces[j])
        bounds[(i, j)] = tree.offset(h)
    fam = AdFamily(tuple(mems), bounds)
    tg = frozenset(rng.sample(range(members), min(targets, members)))
    return SeparationInstance(fam, tg, tree)


def random_omega_family(seed: int, members: int = 8, horizon: int = 12) -> AdFamily:
    """Distinct eventually periodic binary sequences as branches of 2^<omega."""
    rng = make_rng(seed, "omega-family")
    seeds, seen = [], set()
    while len(seeds) < members:
        prefix = tuple(rng.randrange(2) for _ in range(rng.randrange(horizon)))
        cycle = tuple(rng.randrange(2) for _ in range(rng.randrange(1, 4)))
        # prefixes are shorter than horizon and cycle lengths divide 6, so
        # equal sequences agree here and distinct ones differ
        at = eventually_periodic(prefix, cycle)
        key = tuple(at(n) for n in range(horizon + 6))
        if key not in seen:
            seen.add(key)
            seeds.append((prefix, cycle))
    return canonical_ad_family(seeds)


def random_lazy_set(rng: random.Random, depth: int = 3):
    """Infinite sets whose gaps never exceed 2."""
    r = rng.random()
    if depth <= 0 or r < 0.5:
        return Arith(rng.choice((1, 2)), rng.choice((0, 1)))
    if r < 0.8:
        return Union((random_lazy_set(rng, depth - 1), random_lazy_set(rng, depth - 1)))
    add = frozenset(rng.sample(range(60), rng.randrange(6)))
    return Patched(random_lazy_set(rng, depth - 1), add, frozenset())


def random_sparse_set(rng: random.Random):
    """Infinite sets with unbounded gaps, for harder refinement inputs."""
    if rng.random() < 0.5:
        return Poly((rng.randrange(3), rng.randrange(1, 3), 1))
    return Arith(rng.randrange(1, 9), rng.randrange(9))


def random_finite_instance(rng: random.Random, universe: int = 12, sets: int = 5, tau: int = 3):
    n = rng.randrange(1, universe + 1)
    fam = [frozenset(x for x in range(n) if rng.random() < 0.4) for _ in range(rng.randrange(1, sets + 1))]
    targets = frozenset(i for i in range(len(fam)) if rng.random() < 0.5)
    return n, fam, targets, rng.randrange(1, tau + 1)


# ---- spaces -----------------------------------------------------------------

def bit_pairs(n: int) -> list[tuple[frozenset[int], frozenset[int]]]:
    """(A_b, X - A_b) and its reverse for each bit b; A_b = points with bit b set."""
    X = frozenset(range(n))
    out = []
    for b in range(max(1, (n - 1).bit_length())):
        A = frozenset(x for x in X if x >> b & 1)
        out += [(A, X - A), (X - A, A)]
    if n <= 1:
        return [(frozenset(), frozenset())]
    return out


def discrete_space(n: int) -> Space:
    base = [range(n)] + [{x} for x in range(n)]
    return Space(n, base, bit_pairs(n))


def first_rationals(n: int) -> list[Fraction]:
    """0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ... (reduced, by denominator)."""
    out = [Fraction(0), Fraction(1)]
    q = 2
    while len(out) < n:
        out.extend(Fraction(p, q) for p in range(1, q) if Fraction(p, q).denominator == q)
        q += 1
    return out[:n]


def rationals_space(n: int, rng: random.Random, radii: int = 2) -> Space:
    """First n rationals of [0, 1] with a base of open balls.

    Radius 1/64 is always included, so balls around points are singletons and
    the finite space is discrete; the larger radii give overlapping base
    sets, and closures are computed combinatorially within the points.
    """
    pts = first_rationals(n)
    rs = sorted(set(rng.sample([Fraction(1, 2 ** k) for k in range(1, 6)], radii)), reverse=True)
    rs.append(Fraction(1, 64))
    base = [frozenset(range(n))]
    for r in rs:
        for i, p in enumerate(pts):
            ball = frozenset(j for j, q in enumerate(pts) if abs(p - q) < r)
            if ball not in base:
                base.append(ball)
    sp = Space(n, base)
    pairs = find_urysohn_witness(sp) if n > 1 else [(frozenset(), frozenset())]
    return Space(n, base, pairs)


def random_space(seed: int, max_points: int = 8, kind: str | None = None) -> Space:
    rng = make_rng(seed, "space")
    n = rng.randrange(1, max_points + 1)
    kind = kind or rng.choice(("discrete", "rationals"))
    sp = discrete_space(n) if kind == "discrete" else rationals_space(n, rng)
    v = check_urysohn_witness(sp, sp.urysohn_pairs)
    if not v:
        raise ValueError(f"generated presentation lacks a Urysohn witness: {v.witness}")
    return sp


def discrete_fsigma(sp: Space) -> dict[int, list[frozenset[int]]]:
    """Each base set as the union of its singletons (closed in a discrete space)."""
    return {j: [frozenset({x}) for x in sorted(b)] for j, b in enumerate(sp.base)}


# ---- rank instances ---------------------------------------------------------

def random_leveled_tree(rng: random.Random, max_stems: int = 200, max_width: int = 3):
    """Small explicit tree whose stem count prod(1 + width) stays <= max_stems."""
    widths, parents = [1], [[]]
    stems = 2
    while True:
        w = rng.randrange(widths[-1], widths[-1] * max_width + 1)
        if stems * (1 + w) > max_stems or len(widths) >= 8:
            break
        # every node of the previous level gets at least one child
        ps = sorted(list(range(widths[-1])) + [rng.randrange(widths[-1]) for _ in range(w - widths[-1])])
        widths.append(w)
        parents.append(ps)
        stems *= 1 + w
    return LeveledTree(widths, parents)


def random_rank_instance(seed: int, max_stems: int = 200, labels: int = 2) -> RankInstance:
    rng = make_rng(seed, "ranks")
    tree = random_leveled_tree(rng, max_stems)
    depth = tree.depth_limit
    limit = tree.offset(depth)
    avoided = [frozenset(x for x in range(limit) if rng.random() < 0.15) for _ in range(rng.randrange(3))]
    stems = enumerate_inc_seqs(tree, depth, depth)
    density = rng.choice((0.05, 0.15, 0.3))
    bases = {f"l{i}": frozenset(s for s in stems if rng.random() < density) for i in range(labels)}
    return RankInstance(tree, depth, avoided, bases, rng.randrange(1, 4))
