"""Random conditions and extension chains for the poset-law checks."""
import random

from adlab.forcing import Condition, EscapeWitness, extend_avoid, extend_hit
from adlab.lazyset import AdFamily
from adlab.omega_tree import Branch, BranchClosure, FullSubtree, RandomTree


def small_world(seed: int):
    rng = random.Random(seed)
    tree = RandomTree(seed, rng.choice((2, 3)), 12)
    members = tuple(BranchClosure(tree, Branch(tree, [rng.randrange(3) for _ in range(3)], [rng.randrange(3)]))
                    for _ in range(rng.randrange(1, 5)))
    # bounds are irrelevant to the order laws, so promise everything below a large code
    bounds = {(i, j): 10 ** 6 for i in range(len(members)) for j in range(i + 1, len(members))}
    return rng, tree, AdFamily(members, bounds)


def step(rng: random.Random, tree, family, p: Condition) -> Condition:
    """One random extension: add a side member, append a stem node, or raise floors."""
    r = rng.random()
    if r < 0.3:
        return extend_avoid(p, rng.randrange(len(family)))
    if r < 0.7:
        w = EscapeWitness(FullSubtree(tree), tree, fuel=5000)
        return extend_hit(tree, family, p, w, rng.randrange(3))
    h = dict(p.hmap)
    tau = p.stem if rng.random() < 0.5 else p.stem + (rng.randrange(tree.offset(4)),)
    h[tau] = h.get(tau, 0) + rng.randrange(1, 4)
    return Condition(p.stem, h, p.side)


def chain(rng, tree, family, length: int, start: Condition | None = None) -> list[Condition]:
    out = [start or Condition()]
    for _ in range(length):
        out.append(step(rng, tree, family, out[-1]))
    return out


def perturb(rng, p: Condition) -> Condition:
    """A same-stem sibling with its own side and floors."""
    h = {t: v for t, v in p.hmap if rng.random() < 0.5}
    h[p.stem] = rng.randrange(5)
    side = {a for a in p.side if rng.random() < 0.5} | {rng.randrange(4)}
    return Condition(p.stem, h, side)
