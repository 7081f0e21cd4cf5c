import pytest
from hypothesis import given, settings, strategies as st

from adlab.errors import InsufficientDepth, SubsetViolation, UniverseTooLarge
from adlab.lazyset import AdFamily, Arith, Finite, Union, check_promises
from adlab.omega_tree import Branch, BranchClosure, KaryTree
from adlab.separation import (SeparationInstance, SeparatorCertificate, brute_force_separator,
                              canonical_ad_family, intertwined_probe, refine_to_ad,
                              transfer_separator, verify_separator)

EVENS, ODDS = Arith(2, 0), Arith(2, 1)
PARITY = AdFamily((EVENS, ODDS), {(0, 1): 0})


def test_verify_parity_example():
    inst = SeparationInstance(PARITY, {0})
    cert = SeparatorCertificate(EVENS, {1: 0}, {0: (0, 2, 4, 6, 8)})
    assert verify_separator(inst, cert, 50, 5)
    empty = SeparatorCertificate(Finite(()), {1: 0}, {0: (0, 2, 4, 6, 8)})
    v = verify_separator(inst, empty, 50, 5)
    assert not v and v.witness[0] == "bad_witness"
    none = SeparatorCertificate(Finite(()), {1: 0}, {})
    assert verify_separator(inst, none, 50, 5).witness == ("few_witnesses", 0, 0)


def test_verify_reports_hits_and_depth():
    inst = SeparationInstance(PARITY, {0})
    leaky = SeparatorCertificate(Union((EVENS, Finite((7,)))), {1: 0}, {0: (0, 2, 4, 6, 8)})
    assert verify_separator(inst, leaky, 50, 5).witness == ("hit", 1, 7)
    assert verify_separator(inst, SeparatorCertificate(leaky.D, {1: 8}, leaky.witnesses), 50, 5)
    with pytest.raises(InsufficientDepth):
        verify_separator(inst, SeparatorCertificate(leaky.D, {1: 60}, leaky.witnesses), 50, 5)
    with pytest.raises(InsufficientDepth):
        verify_separator(inst, leaky, 8, 5)


def test_verify_tree_spines():
    T = KaryTree(2)
    left = BranchClosure(T, Branch(T, (), (0,)))
    right = BranchClosure(T, Branch(T, (), (1,)))
    inst = SeparationInstance(AdFamily((left, right), {(0, 1): 1}), {1}, T)
    spine = tuple(Branch(T, (), (1,)).prefix_nodes(12))[1:]
    cert = SeparatorCertificate(Finite(spine), {0: 1}, {1: spine})
    assert verify_separator(inst, cert, T.offset(30), 10)


def test_brute_force_examples():
    fam = [{0, 1, 2}, {3, 4, 5}]
    assert brute_force_separator(8, fam, {0}, 2) == {0, 1}
    assert brute_force_separator(8, fam, set(), 1) == frozenset()
    assert brute_force_separator(4, [{0, 1}, {0, 1}], {0}, 2) is None
    with pytest.raises(UniverseTooLarge):
        brute_force_separator(25, fam, {0}, 1)


def exhaustive(n, fam, targets, tau):
    """Independent double loop: subsets by bitmask, every set, no pruning."""
    for mask in range(1 << n):
        D = {x for x in range(n) if mask >> x & 1}
        if all((len(D & s) >= tau) == (i in targets) for i, s in enumerate(fam)):
            return frozenset(D)
    return None


@settings(max_examples=150)
@given(st.integers(1, 9), st.lists(st.sets(st.integers(0, 8)), min_size=1, max_size=4),
       st.sets(st.integers(0, 3)), st.integers(1, 3))
def test_brute_force_matches_exhaustive(n, fam, targets, tau):
    fam = [frozenset(x for x in s if x < n) for s in fam]
    targets = {t for t in targets if t < len(fam)}
    assert brute_force_separator(n, fam, targets, tau) == exhaustive(n, fam, targets, tau)


def test_refine_examples():
    a0, a1 = refine_to_ad([EVENS, EVENS])
    assert a0.elements_below(20) == [0, 4, 8, 12, 16]
    assert a1.elements_below(20) == [2, 6, 10, 14, 18]
    b0, b1 = refine_to_ad([EVENS, ODDS], 100)
    assert not set(b0.elements_below(100)) & set(b1.elements_below(100))
    assert all(x % 2 == 0 for x in b0.elements_below(100))
    only, = refine_to_ad([Arith(3, 1)])
    assert only.elements_below(20) == Arith(3, 1).elements_below(20)
    with pytest.raises(ValueError):
        refine_to_ad([Finite((1, 2))])


def test_refined_membership_is_lazy():
    a0, a1 = refine_to_ad([EVENS, EVENS])
    assert 400 in a0 and 402 in a1 and 402 not in a0
    assert a0.next_above(400) == 404


def test_canonical_family_examples():
    fam = canonical_ad_family([((), (0,)), ((), (1,))])
    assert fam.pair_bound(0, 1) == 1  # only the empty sequence (code 0) is shared
    fam = canonical_ad_family([((), (0, 1)), ((0,), (1,))])
    # 0101... and 0111... agree on positions 0 and 1, so prefixes up to length 2
    # (codes below 7) are shared
    assert fam.pair_bound(0, 1) == 7
    assert check_promises(fam, 500)
    assert len(canonical_ad_family([((1,), (0,))])) == 1
    with pytest.raises(ValueError):
        canonical_ad_family([((), (0,)), ((0, 0), (0,))])


def test_transfer_examples():
    inst = SeparationInstance(AdFamily((EVENS, ODDS), {(0, 1): 0}), {0})
    cert = SeparatorCertificate(EVENS, {1: 0}, {0: (0, 2, 4, 6, 8)})
    assert verify_separator(inst, cert, 100, 5)
    same = transfer_separator(cert, {0: (EVENS, EVENS)}, 100)
    assert same == SeparatorCertificate(EVENS, {1: 0}, {0: (0, 2, 4, 6, 8)})
    omega = Arith(1, 0)
    up = transfer_separator(cert, {0: (EVENS, omega)}, 100)
    inst2 = SeparationInstance(AdFamily((omega, Finite((1, 3))), {(0, 1): 4}), {0})
    assert verify_separator(inst2, SeparatorCertificate(up.D, {1: 4}, up.witnesses), 100, 5)
    with pytest.raises(SubsetViolation):
        transfer_separator(cert, {0: (omega, EVENS)}, 100)


def test_transfer_after_refinement():
    sets = [Arith(3, 0), Arith(2, 0)]
    r0, r1 = refine_to_ad(sets, 200)
    # separate the refined first set from the refined second one by D = r0
    inst = SeparationInstance(AdFamily((r0, r1), {(0, 1): 0}), {0})
    cert = SeparatorCertificate(r0, {1: 0}, {0: tuple(r0.elements_below(200)[:10])})
    assert verify_separator(inst, cert, 200, 10)
    out = transfer_separator(cert, {0: (r0, sets[0])}, 200)
    orig = SeparationInstance(AdFamily((sets[0], r1), {(0, 1): 0}), {0})
    assert verify_separator(orig, out, 200, 10)


def test_intertwined_examples():
    B = AdFamily((Arith(4, 0), Arith(4, 1)), {(0, 1): 0})
    C = AdFamily((Arith(4, 2), Arith(4, 3)), {(0, 1): 0})
    rep = intertwined_probe(B, C, Finite(()), 100, 3)
    assert rep.verdict == "ConsistentToDepth" and set(rep.c_counts) == {0}
    rep = intertwined_probe(B, C, C[0], 100, 3)
    assert rep.c_counts[0] == 25 and rep.b_counts == (0, 0)
    rep = intertwined_probe(B, C, Union((C[0], C[1])), 100, 3)
    assert rep.verdict == "RefutedToDepth" and rep.witness == (0, 0)
    broken = AdFamily((EVENS, EVENS), {(0, 1): 0})
    with pytest.raises(ValueError):
        intertwined_probe(broken, C, EVENS, 50, 2)


def test_certificate_json_round_trip():
    cert = SeparatorCertificate(Finite((1, 5, 9)), {2: 4}, {0: (1, 5)})
    again = SeparatorCertificate.from_json(cert.to_json())
    assert again.to_json() == cert.to_json()
    assert list(cert.to_json()) == ["D", "bounds", "witnesses"]
