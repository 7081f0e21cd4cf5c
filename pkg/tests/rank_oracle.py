"""Brute-force ranks: build the stages W_0, W_1, ... as explicit sets."""
from adlab.omega_tree import enumerate_inc_seqs


def brute_ranks(tree, depth, blocked, base, theta):
    stems = enumerate_inc_seqs(tree, depth, depth)
    limit = tree.offset(depth) if depth else 0

    def succ(eta):
        lo = tree.height(eta[-1]) + 1 if eta else 0
        return [eta + (t,) for t in range(limit) if tree.height(t) >= lo and t not in blocked]

    W = set(s for s in stems if s in base)
    rank = {s: 0 for s in W}
    alpha = 0
    while True:
        alpha += 1
        grown = {s for s in stems if s not in W and sum(1 for c in succ(s) if c in W) >= theta}
        if not grown:
            break
        W |= grown
        for s in grown:
            rank[s] = alpha
    return {s: rank.get(s) for s in stems}
