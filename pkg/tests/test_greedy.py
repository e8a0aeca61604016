import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from greedylab.errors import ContractError, InputError
from greedylab.greedy import (
    SignPattern,
    Ties,
    greedy_ordering,
    greedy_sets,
    greedy_sum,
    greedy_sums,
    indicator,
    is_greedy_set,
    partial_sum,
    projection,
    restricted_truncation,
    truncation,
)
from greedylab.spaces import CoeffVector

small_vectors = st.lists(st.sampled_from([0.0, 0.5, -0.5, 1.0, -1.0, 2.0]), min_size=1, max_size=6).map(
    CoeffVector.from_dense
)


def brute_greedy_sets(f, m):
    d = f.dimension
    x = tuple(f.dense())
    return sorted(A for A in itertools.combinations(range(1, d + 1), m) if O.is_greedy(x, set(A)))


@settings(max_examples=200, deadline=None)
@given(small_vectors, st.integers(0, 6))
def test_greedy_sets_match_brute_force(f, m):
    m = min(m, f.dimension)
    got = [A.indices for A in greedy_sets(f, m)]
    assert got == brute_greedy_sets(f, m)


@settings(max_examples=200, deadline=None)
@given(small_vectors, st.integers(0, 6))
def test_first_policy_is_prefix_of_ordering(f, m):
    m = min(m, f.dimension)
    (A,) = greedy_sets(f, m, Ties.FIRST)
    assert A.indices == tuple(sorted(greedy_ordering(f)[:m]))
    assert A in greedy_sets(f, m, Ties.ALL)
    assert greedy_sum(f, m) == projection(f, A)


def test_tie_example():
    f = CoeffVector.from_dense([1.0, -1.0, 0.5])
    assert [A.indices for A in greedy_sets(f, 1)] == [(1,), (2,)]
    assert [A.indices for A in greedy_sets(f, 1, "first")] == [(1,)]
    assert len(greedy_sums(f, 1)) == 2
    # padding with zero coordinates is allowed for greedy sets
    g = CoeffVector.from_dense([1.0, 0.0, 0.0])
    assert [A.indices for A in greedy_sets(g, 2)] == [(1, 2), (1, 3)]


def test_greedy_sets_bad_m():
    with pytest.raises(InputError):
        greedy_sets(CoeffVector.basis(3, 1), 4)


def test_projection_and_partial_sums():
    f = CoeffVector.from_dense([1.0, 2.0, 3.0, 4.0])
    assert projection(f, [2, 4]).dense().tolist() == [0, 2, 0, 4]
    assert partial_sum(f, 2).dense().tolist() == [1, 2, 0, 0]
    assert partial_sum(f, 0).is_zero()
    with pytest.raises(InputError):
        partial_sum(f, 5)
    with pytest.raises(InputError):
        projection(f, [0])


def test_indicator_with_signs():
    eps = SignPattern({1: 1.0, 3: -1j})
    v = indicator(3, [1, 3], eps)
    assert v.dense().tolist() == [1, 0, -1j]
    assert indicator(3, [2]).dense().tolist() == [0, 1, 0]
    with pytest.raises(InputError):
        indicator(3, [1, 2], eps)
    with pytest.raises(InputError):
        SignPattern({1: 0.5})


def test_truncation_example():
    f = CoeffVector.from_dense([3.0, -2.0, 1.0])
    assert restricted_truncation(f, [1, 2]).dense().tolist() == [2.0, -2.0, 0.0]
    assert truncation(f, [1, 2]).dense().tolist() == [2.0, -2.0, 1.0]
    assert restricted_truncation(f, []).is_zero()
    assert truncation(f, []) == f


def test_truncation_complex_signs():
    f = CoeffVector.from_dense([2j, -1.0])
    u = restricted_truncation(f, [1, 2])
    assert u.dense().tolist() == [1j, -1.0]


def test_truncation_contracts():
    f = CoeffVector.from_dense([3.0, -2.0, 0.0])
    with pytest.raises(ContractError):
        truncation(f, [2])  # not greedy
    with pytest.raises(ContractError):
        restricted_truncation(f, [1, 2, 3])  # padded by a zero coordinate


@settings(max_examples=200, deadline=None)
@given(small_vectors, st.integers(1, 6))
def test_truncation_matches_oracle(f, m):
    m = min(m, len(f.support))
    if m == 0:
        return
    x = tuple(f.dense())
    for A in greedy_sets(f, m):
        if not set(A.indices) <= f.support:
            continue
        assert tuple(restricted_truncation(f, A).dense()) == O.restricted_trunc(x, set(A.indices))


@settings(max_examples=100, deadline=None)
@given(small_vectors, st.integers(0, 6))
def test_greedy_and_partial_complements(f, m):
    m = min(m, f.dimension)
    for A in greedy_sets(f, m):
        rest = [n for n in range(1, f.dimension + 1) if n not in A.indices]
        assert projection(f, A) + projection(f, rest) == f
    assert partial_sum(f, m) + (f - partial_sum(f, m)) == f
