import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinsets.core import BlockSchedule, IntegerSet
from thinsets.errors import BlockOverflow, InvalidInput, ResourceExceeded
from thinsets.relations import (
    Relation,
    count_relation_supports,
    extract_sqrt_block,
    find_relation,
    greedy_quasi_independent,
    is_dissociated,
    is_quasi_independent,
    max_quasi_independent,
    prune_block_max_relation,
)

from oracles import has_relation, max_qi_size, signed_zero_supports

small_sets = st.sets(st.integers(1, 60), min_size=1, max_size=9)
wide_sets = st.sets(st.integers(1, 10**4), min_size=1, max_size=12)


# --- Relation ---------------------------------------------------------------


def test_relation_canonical_form_and_json():
    r = Relation.from_pairs([(8, 1), (3, -1), (5, -1)])
    assert r.support == (3, 5, 8) and r.signs == (1, 1, -1)
    assert Relation.from_json(r.to_json()) == r
    assert len(r) == 3


@pytest.mark.parametrize(
    "support, signs",
    [((3, 5, 8), (1, 1, 1)), ((5, 3, 8), (1, 1, -1)), ((3, 5, 8), (1, -1, 1)), ((), ())],
)
def test_relation_rejects_invalid(support, signs):
    with pytest.raises(InvalidInput):
        Relation(support, signs)


# --- find_relation ------------------------------------------------------------


def test_find_relation_examples():
    r = find_relation([3, 5, 8], 3)
    assert r == Relation((3, 5, 8), (1, 1, -1))
    for s in range(2, 6):
        assert find_relation([1, 2, 4, 8, 16], s) is None
    r = find_relation([1, 2, 3, 4], 4)
    assert r.support == (1, 2, 3, 4)
    assert sum(k * t for k, t in zip(r.support, r.signs)) == 0


def test_find_relation_respects_threshold():
    assert find_relation([3, 5, 8, 10, 13], 3, M=5) == Relation((5, 8, 13), (1, 1, -1))
    assert find_relation([3, 5, 8, 100], 3, M=4) is None


def test_find_relation_rejects_short_lengths():
    with pytest.raises(InvalidInput):
        find_relation([1, 2], 1)
    assert find_relation([1, 2], 2) is None


@settings(max_examples=300)
@given(small_sets, st.integers(3, 8))
def test_find_relation_agrees_with_enumeration(A, s):
    r = find_relation(A, s)
    assert (r is not None) == bool(signed_zero_supports(A, s))
    if r is not None:
        assert set(r.support) <= A and len(r) == s
        assert sum(int(k) * t for k, t in zip(r.support, r.signs)) == 0


@settings(max_examples=200)
@given(small_sets)
def test_quasi_independence_agrees_with_enumeration(A):
    assert is_quasi_independent(A) == (not has_relation(A))


@settings(max_examples=200)
@given(small_sets, st.integers(3, 6))
def test_support_count_agrees_with_enumeration(A, s):
    assert count_relation_supports(A, s) == len(signed_zero_supports(A, s))


@settings(max_examples=100)
@given(small_sets, st.sets(st.integers(1, 60), max_size=4))
def test_relations_persist_in_supersets(A, extra):
    if not is_quasi_independent(A):
        assert not is_quasi_independent(A | extra)


def test_quasi_independence_examples():
    assert is_quasi_independent([7])
    assert is_quasi_independent([1, 2, 4])
    assert not is_quasi_independent([3, 4, 5, 6])


def test_count_examples():
    assert count_relation_supports(range(1, 7), 3) == 6
    assert sorted(signed_zero_supports(range(1, 7), 3)) == sorted(
        [(1, 2, 3), (1, 3, 4), (1, 4, 5), (2, 3, 5), (1, 5, 6), (2, 4, 6)]
    )
    assert count_relation_supports([1, 2, 3, 4], 4) == 1
    assert count_relation_supports([1, 2, 4, 8], 3) == 0


def test_dissociated_sets_skip_the_search():
    A = [3**j for j in range(40)]
    assert is_dissociated(np.array(A))
    assert is_quasi_independent(A)


def test_budget_and_caps_raise_resource_exceeded():
    A = list(range(1, 41))
    with pytest.raises(ResourceExceeded):
        find_relation(A, 12, budget=1000)
    with pytest.raises(ResourceExceeded):
        is_quasi_independent(list(range(100, 130)))
    with pytest.raises(ResourceExceeded):
        count_relation_supports(range(1, 30), 3)


def test_heuristic_mode_reports_unknown_or_false():
    assert is_quasi_independent(list(range(1, 40)), heuristic=True) is False
    sidonish = [2**j + 3**j for j in range(30)]
    assert is_quasi_independent(sidonish, heuristic=True) in (None, True)


def test_overflowing_sums_raise():
    big = [2**62, 2**62 + 1, 2**62 + 3]
    with pytest.raises(BlockOverflow):
        find_relation(big, 3)


# --- extraction -------------------------------------------------------------


def test_max_quasi_independent_examples():
    m = max_quasi_independent(range(1, 7))
    assert len(m) == 3 and m.tolist() == [1, 2, 4]
    assert max_quasi_independent([1, 2, 4, 8]).tolist() == [1, 2, 4, 8]
    assert max_quasi_independent([9]).tolist() == [9]


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 40), min_size=1, max_size=8))
def test_max_quasi_independent_is_maximum(A):
    m = max_quasi_independent(A)
    assert set(m) <= A
    assert not has_relation(m.tolist())
    assert len(m) == max_qi_size(A)
    assert len(m) >= len(greedy_quasi_independent(A).subset)


def test_greedy_examples():
    assert greedy_quasi_independent([1, 2, 4, 8]).subset.tolist() == [1, 2, 4, 8]
    assert greedy_quasi_independent([3, 5, 8]).subset.tolist() == [5, 8]
    g = greedy_quasi_independent([])
    assert len(g.subset) == 0 and g.complete


@settings(max_examples=100)
@given(wide_sets)
def test_greedy_output_is_quasi_independent(A):
    g = greedy_quasi_independent(A)
    assert set(g.subset) <= A
    assert is_quasi_independent(g.subset)


def test_extract_case_one():
    out = extract_sqrt_block([5, 9, 10, 11], BlockSchedule.dyadic())
    assert out.tolist() == [9, 10, 11]


def test_extract_case_two():
    A = [5, 12, 20, 40]  # one element in each of [4,8), [8,16), [16,32), [32,64)
    out = extract_sqrt_block(A, BlockSchedule.dyadic())
    assert out.tolist() == [5, 20]
    assert extract_sqrt_block([77]).tolist() == [77]


@st.composite
def block_sparse_sets(draw):
    # at most two elements per dyadic block: every trace is quasi-independent
    out = set()
    for j in draw(st.sets(st.integers(1, 40), min_size=1, max_size=25)):
        k = draw(st.integers(1, 2))
        out |= set(draw(st.lists(st.integers(2**j, 2 ** (j + 1) - 1), min_size=k, max_size=k)))
    return out


@settings(max_examples=100)
@given(block_sparse_sets())
def test_extract_square_root_guarantee(A):
    out = extract_sqrt_block(A)
    assert set(out) <= A
    assert len(out) >= math.ceil(0.5 * math.sqrt(len(A)))
    assert is_quasi_independent(out, exact_cap=24, heuristic=True) is not False


def test_extract_rejects_dependent_trace():
    with pytest.raises(InvalidInput):
        extract_sqrt_block([9, 10, 11, 12, 13], BlockSchedule.dyadic())


def test_prune_examples():
    p = prune_block_max_relation([1, 2, 4, 8], 3)
    assert p.kept.tolist() == [1, 2, 4, 8] and len(p.support) == 0
    p = prune_block_max_relation([3, 5, 8, 21], 3)
    assert p.kept.tolist() == [21] and p.support.tolist() == [3, 5, 8]
    p = prune_block_max_relation([], 0)
    assert len(p.kept) == 0 and len(p.support) == 0 and p.verified


def test_prune_flags_long_relation():
    p = prune_block_max_relation([1, 2, 3, 4], 3)
    assert p.support.tolist() == [1, 2, 3, 4]
    assert not p.precondition_ok


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 50), max_size=9))
def test_prune_remainder_is_quasi_independent(A):
    p = prune_block_max_relation(A, len(A))
    assert set(p.kept) | set(p.support) == A
    assert not has_relation(p.kept.tolist())
