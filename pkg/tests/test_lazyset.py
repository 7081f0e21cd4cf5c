import pytest
from hypothesis import given, settings, strategies as st

from adlab.errors import InsufficientDepth
from adlab.generators import make_rng, random_lazy_set, random_omega_family, random_sparse_set
from adlab.lazyset import (AdFamily, Arith, BinaryBranch, Finite, ModulusFunction, Patched, Poly, Union,
                           check_orthogonal, check_promises, collection_from_relation,
                           eventually_dominates, from_json, intersection_below)

EVENS, ODDS = Arith(2, 0), Arith(2, 1)


def test_basic_sets():
    assert EVENS.elements_below(9) == [0, 2, 4, 6, 8]
    assert Poly((0, 0, 1)).elements_below(30) == [0, 1, 4, 9, 16, 25]
    assert EVENS.next_above(-1) == 0 and EVENS.next_above(4) == 6
    assert Finite((5, 1, 3)).elements_below(100) == [1, 3, 5]
    assert not Finite((1,)).infinite and EVENS.infinite
    assert Patched(EVENS, frozenset({3}), frozenset({0})).elements_below(7) == [2, 3, 4, 6]
    assert Union((Arith(3, 0), Arith(5, 0))).elements_below(11) == [0, 3, 5, 6, 9, 10]


def test_binary_branch_codes():
    # x = 0101...: prefixes of length n coded 2^n - 1 + int(x|n, 2)
    b = BinaryBranch((), (0, 1))
    assert b.elements_below(16) == [0, 1, 4, 9]
    assert 4 in b and 5 not in b


@pytest.mark.parametrize("a,b,d,expected", [
    (EVENS, ODDS, 100, []),
    (EVENS, Arith(4, 0), 10, [0, 4, 8]),
    (Union((Finite((0, 1, 2)), Arith(100, 100))), Union((Finite((2, 3, 4)), Arith(200, 200))), 50, [2]),
])
def test_intersection_below(a, b, d, expected):
    assert intersection_below(a, b, d) == expected


def test_check_orthogonal_examples():
    assert check_orthogonal(EVENS, ODDS, 0, 10)
    v = check_orthogonal(EVENS, EVENS, 4, 10)
    assert not v and v.witness == 4
    b = Union((Poly((1, 0, 1)), Finite((0, 1))))
    assert check_orthogonal(Poly((0, 0, 1)), b, 2, 100)
    with pytest.raises(InsufficientDepth):
        check_orthogonal(EVENS, ODDS, 20, 10)


def test_eventually_dominates_examples():
    ident = ModulusFunction(lambda n: n)
    assert eventually_dominates(ident, ident, 0, 50)
    v = eventually_dominates(lambda n: n + 1, ident, 0, 5)
    assert not v and v.witness == 0
    assert eventually_dominates(ident, lambda n: 2 * n, 1, 100)
    with pytest.raises(InsufficientDepth):
        eventually_dominates(ident, ident, 5, 5)


def test_collection_from_relation_examples():
    assert collection_from_relation([]) == []
    assert collection_from_relation([("a", 0), ("a", 2), ("b", 1)]) == [{0, 2}, {1}]
    assert collection_from_relation([("a", 5), ("b", 5)]) == [{5}, {5}]


@given(st.sets(st.tuples(st.integers(0, 5), st.integers(0, 30)), max_size=30))
def test_collection_flattening_round_trip(pairs):
    cols = collection_from_relation(sorted(pairs))
    keys = list(dict.fromkeys(a for a, _ in sorted(pairs)))
    assert {(keys[i], n) for i, c in enumerate(cols) for n in c} == pairs


@settings(max_examples=200)
@given(st.integers(0, 10 ** 6), st.integers(0, 200), st.integers(0, 200))
def test_prefix_monotone(seed, d1, d2):
    rng = make_rng(seed, "prop")
    s = random_lazy_set(rng) if seed % 2 else random_sparse_set(rng)
    d, e = sorted((d1, d2))
    small, big = s.elements_below(d), s.elements_below(e)
    assert big[:len(small)] == small
    assert all(a < b for a, b in zip(big, big[1:])) and all(x < e for x in big)
    assert all(x in s for x in big)
    w = s.witness(3)
    assert w in s.elements_below(w + 1)


@settings(max_examples=50)
@given(st.integers(0, 10 ** 6), st.sampled_from([16, 64, 300, 2000]))
def test_generated_promises_hold(seed, depth):
    fam = random_omega_family(seed, members=6)
    assert check_promises(fam, depth)


def test_json_round_trip():
    rng = make_rng(3, "json")
    for _ in range(50):
        s = random_lazy_set(rng)
        t = from_json(s.to_json())
        assert t.elements_below(300) == s.elements_below(300)
    fam = AdFamily((EVENS, ODDS), {(0, 1): 0})
    again = AdFamily.from_json(fam.to_json())
    assert again.pair_bound(1, 0) == 0 and again[1].elements_below(6) == [1, 3, 5]


def test_family_needs_every_pair_bound():
    with pytest.raises(ValueError):
        AdFamily((EVENS, ODDS, Arith(3, 0)), {(0, 1): 0})
