import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from adlab.errors import StemMismatch, TooFewSets, WitnessExhausted
from adlab.forcing import (Avoid, Condition, EscapeWitness, Hit, centered_class, extend_avoid, extend_hit,
                           extends, extensible_to, generic_run, in_ideal, is_sunflower, merge_same_stem,
                           preparation_Etau, replay_trace, sunflower_extract, validate_condition)
from adlab.lazyset import AdFamily, Finite
from adlab.omega_tree import Branch, BranchClosure, KaryTree
from adlab.separation import SeparationInstance, verify_separator
from poset_gen import chain, perturb, small_world

T = KaryTree(2)
LEFT = BranchClosure(T, Branch(T, (), (0,)))
RIGHT = BranchClosure(T, Branch(T, (), (1,)))
SPINES = AdFamily((LEFT, RIGHT), {(0, 1): 1})


def test_validate_condition_examples():
    assert validate_condition(T, SPINES, Condition())
    v = validate_condition(T, SPINES, Condition((7,), {(): 5}))
    assert not v and v.witness == 0
    # node 1 has height 1, node 17 height 4
    assert validate_condition(T, SPINES, Condition((1, 17), {(): 1, (1,): 4}))
    assert not validate_condition(T, SPINES, Condition((3, 1)))


def test_extends_examples():
    p = Condition((2,), {}, {0})
    assert extends(T, SPINES, p, p)
    q = Condition((2, 3), {}, {0})  # node 3 lies on the left spine
    v = extends(T, SPINES, q, p)
    assert not v and v.witness == (4, 1)
    q = extend_hit(T, SPINES, p, EscapeWitness(RIGHT, T), 0)
    assert extends(T, SPINES, q, p)
    assert not extends(T, SPINES, p, q)
    assert extends(T, SPINES, Condition((), {(): 1}), Condition()) and \
        not extends(T, SPINES, Condition(), Condition((), {(): 1}))


def test_merge_examples():
    p, q = Condition((2,), {(): 2}, {0}), Condition((2,), {(): 5}, {1})
    r = merge_same_stem(p, q)
    assert r.side == {0, 1} and r.h(()) == 5
    assert extends(T, SPINES, r, p) and extends(T, SPINES, r, q)
    assert merge_same_stem(p, p) == p
    with pytest.raises(StemMismatch):
        merge_same_stem(p, Condition((1,)))


def test_centered_classes():
    assert centered_class(Condition()) == ()
    p, q = Condition((2,), {}, {0}), Condition((2,), {}, {1})
    assert centered_class(p) == centered_class(q)
    assert validate_condition(T, SPINES, merge_same_stem(p, q))
    assert centered_class(Condition((1,))) != centered_class(p)


def test_extensible_to_examples():
    p = Condition((2,), {(2,): 3}, {0})
    assert extensible_to(T, SPINES, p, (2,))
    assert not extensible_to(T, SPINES, p, (2, 5))  # height 2 is below the floor 3
    assert extensible_to(T, SPINES, p, (2, 12))  # height 3, off the left spine
    assert not extensible_to(T, SPINES, p, (2, 7))  # height 3, on the left spine


def test_in_ideal_examples():
    assert in_ideal(LEFT, SPINES, {0}, 0, 100)
    v = in_ideal(BranchClosure(T, Branch(T, (1, 0), (0,))), SPINES, {0, 1}, 0, 100)
    assert not v and v.witness == 5
    assert in_ideal(Finite((1, 4)), SPINES, set(), 10, 100)


def test_extend_avoid_and_hit():
    p = Condition()
    assert extend_avoid(p, 0).side == {0}
    assert extend_avoid(extend_avoid(p, 0), 0) == extend_avoid(p, 0)
    q = extend_hit(T, SPINES, extend_avoid(p, 0), EscapeWitness(RIGHT, T), 0)
    assert q.stem == (2,)  # right child of the root, height 1
    q = extend_hit(T, SPINES, p, EscapeWitness(RIGHT, T), 6)
    assert T.height(q.stem[0]) == 7
    with pytest.raises(WitnessExhausted):
        extend_hit(T, SPINES, Condition((), {}, {1}), EscapeWitness(RIGHT, T, fuel=50), 0)


def test_generic_run_avoid_only():
    start = Condition((2,), {}, set())
    res = generic_run(T, SPINES, [Avoid(0)], 10, start)
    assert res.final.stem == (2,) and res.certificate.bounds == {0: 3}


def test_generic_run_spines():
    tasks = [Avoid(0), Hit(EscapeWitness(RIGHT, T), target=1)]
    res = generic_run(T, SPINES, tasks, 40)
    stem = res.final.stem
    assert len(stem) == 20 and all(c in RIGHT for c in stem)
    hs = [T.height(c) for c in stem]
    assert all(a < b for a, b in zip(hs, hs[1:]))
    inst = SeparationInstance(SPINES, {1}, T)
    assert verify_separator(inst, res.certificate, T.offset(hs[-1] + 1), 19)
    assert replay_trace(T, SPINES, res.trace)
    for q, p in zip(res.chain[1:], res.chain):
        assert extends(T, SPINES, q, p)
    assert set(res.trace[0]) == {"step", "task", "stem", "side", "hmap_support"}


def test_generic_run_two_hits():
    fuel = 30
    tasks = [Hit(EscapeWitness(LEFT, T), target=0), Hit(EscapeWitness(RIGHT, T), target=1)]
    res = generic_run(T, SPINES, tasks, fuel)
    D = set(res.final.stem)
    assert len(D & set(LEFT.elements_below(T.offset(40)))) >= fuel // 3
    assert len(D & set(RIGHT.elements_below(T.offset(40)))) >= fuel // 3


def test_replay_catches_post_bound_hit():
    res = generic_run(T, SPINES, [Avoid(0), Hit(EscapeWitness(RIGHT, T), target=1)], 6)
    trace = [dict(r) for r in res.trace]
    trace[-1]["stem"] = trace[-1]["stem"] + [LEFT.witness(30)]
    assert not replay_trace(T, SPINES, trace)


def test_preparation_examples():
    assert preparation_Etau([{1}, {2}, {3}, {4}], 0).E == frozenset()
    prep = preparation_Etau([{1, 2}, {1, 3}, {1, 4}], 1)
    assert prep.E == {1} and prep.misses == {1: 0, 2: 2, 3: 2, 4: 2}
    assert prep.E <= {1, 2} & {1, 3} and prep.pair == (0, 1)
    assert preparation_Etau([{5}, {5}, {5}], 1).E == {5}
    with pytest.raises(TooFewSets):
        preparation_Etau([{1}], 1)
    with pytest.raises(ValueError):
        preparation_Etau([{1, 2}, {1, 2}], 1)


@settings(max_examples=200)
@given(st.lists(st.sets(st.integers(0, 9), max_size=6), min_size=2, max_size=6))
def test_preparation_bound(U):
    bound = max(len(a & b) for a, b in itertools.combinations(U, 2))
    try:
        prep = preparation_Etau(U, bound)
    except TooFewSets:
        # allowed only below the guaranteed size
        assert len(U) < bound + 3
        return
    assert len(prep.E) <= bound
    b, c = prep.pair
    assert prep.E <= set(U[b]) & set(U[c])


def test_sunflower_examples():
    core, idx = sunflower_extract([{1, 2}, {1, 3}, {1, 4}], 3)
    assert core == {1} and idx == (0, 1, 2)
    core, idx = sunflower_extract([{1}, {2}, {3}], 3)
    assert core == frozenset()
    assert sunflower_extract([{1, 2}, {2, 3}, {1, 3}], 3) is None


def brute_sunflower(sets, k):
    for idx in itertools.combinations(range(len(sets)), k):
        chosen = [frozenset(sets[i]) for i in idx]
        core = frozenset.intersection(*chosen)
        if all(a & b == core for a, b in itertools.combinations(chosen, 2)):
            return core, idx
    return None


@settings(max_examples=300)
@given(st.lists(st.sets(st.integers(0, 6), max_size=4), max_size=8), st.integers(1, 4))
def test_sunflower_matches_brute_force(sets, k):
    assert sunflower_extract(sets, k) == brute_sunflower(sets, k)


def test_greedy_sunflower_is_sound():
    rng = random.Random(5)
    sets = [frozenset(rng.sample(range(40), 3)) for _ in range(30)]
    found = sunflower_extract(sets, 3)
    assert found is not None
    core, idx = found
    assert is_sunflower([frozenset(s) for s in sets], idx) == core


@settings(max_examples=80)
@given(st.integers(0, 10 ** 6))
def test_order_laws_on_chains(seed):
    rng, tree, fam = small_world(seed)
    c = chain(rng, tree, fam, 5)
    for p in c:
        assert validate_condition(tree, fam, p)
        assert extends(tree, fam, p, p)
    for i, j in itertools.combinations(range(len(c)), 2):
        assert extends(tree, fam, c[j], c[i])
    p = c[-1]
    q = perturb(rng, p)
    r = merge_same_stem(p, q)
    assert extends(tree, fam, r, p) and extends(tree, fam, r, q)
    assert merge_same_stem(r, p) == r
