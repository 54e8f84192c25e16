import pytest
from hypothesis import given, strategies as st

import oracles as O
from sandwichmat.combinatorics import (
    gl_order,
    idempotent_counts,
    mmn_dclass_counts,
    parse_target,
    q_binomial,
    q_factorial,
    rank_formulas,
    sandwich_counts,
    sandwich_size_regular,
)
from sandwichmat.errors import DomainError, UnsupportedParameters


def test_q_values():
    assert q_factorial(5, 1) == 1
    assert q_binomial(4, 3, 0) == 1
    assert q_binomial(3, 3, 1) == 13
    assert q_binomial(2, 3, 1) == 7
    assert q_binomial(2, 2, 1) == 3
    with pytest.raises(DomainError):
        q_binomial(2, 2, 3)


@pytest.mark.parametrize("q,m,s", [(2, 2, 1), (2, 3, 1), (2, 3, 2), (3, 2, 1), (3, 3, 1), (2, 4, 2)])
def test_q_binomial_counts_subspaces(q, m, s):
    assert q_binomial(q, m, s) == O.count_subspaces(O.RefField(q), m, s)


@pytest.mark.parametrize("q,s", [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)])
def test_gl_order_counts_invertibles(q, s):
    assert gl_order(q, s) == O.count_invertible(O.RefField(q), s)


def test_gl_order_values():
    assert gl_order(2, 0) == 1
    assert gl_order(3, 1) == 2
    assert gl_order(2, 2) == 6


@given(st.integers(2, 7), st.integers(1, 7), st.data())
def test_pascal_and_symmetry(q, m, data):
    s = data.draw(st.integers(1, m))
    assert q_binomial(q, m, s) == q_binomial(q, m - 1, s - 1) + q**s * q_binomial(q, m - 1, s) if s < m else True
    assert q_binomial(q, m, s) == q_binomial(q, m, m - s)


@given(st.integers(2, 5), st.integers(1, 4), st.integers(1, 4))
def test_dclasses_partition_all_matrices(q, m, n):
    assert sum(mmn_dclass_counts(q, m, n, s)["size"] for s in range(min(m, n) + 1)) == q ** (m * n)


def test_mmn_values():
    assert mmn_dclass_counts(3, 2, 3, 1) == {"nR": 4, "nL": 13, "nH": 52, "hSize": 2, "size": 104}
    assert [mmn_dclass_counts(2, 2, 2, s)["size"] for s in range(3)] == [1, 9, 6]
    assert mmn_dclass_counts(5, 3, 4, 0)["size"] == 1


def test_sandwich_count_values():
    c = sandwich_counts(2, 2, 2, 1, 1)
    assert c["D_size"] == 4 and c["P_size"] == 5
    c = sandwich_counts(3, 2, 3, 1, 1)
    assert (c["nR"], c["nL"], c["H_size"], c["D_size"]) == (3, 9, 2, 54)
    c = sandwich_counts(3, 3, 3, 2, 0)
    assert all(c[k] == 1 for k in ("R_size", "L_size", "H_size", "nR", "nL", "nH", "D_size"))


@given(st.integers(2, 5), st.integers(1, 4), st.integers(1, 4), st.data())
def test_regular_size_is_sum_of_layers(q, m, n, data):
    r = data.draw(st.integers(0, min(m, n)))
    layers = [sandwich_counts(q, m, n, r, s) for s in range(r + 1)]
    assert sandwich_size_regular(q, m, n, r) == sum(c["D_size"] for c in layers)
    for c in layers:
        assert c["D_size"] == c["nR"] * c["R_size"] == c["nL"] * c["L_size"] == c["nH"] * c["H_size"]
        assert c["nH"] == c["nH_hat"] * c["H_per_hat"]


def test_idempotent_values():
    assert idempotent_counts(2, 2, 2, 1) == 5
    assert idempotent_counts(2, 0, 0, 2, square=True) == 8
    assert idempotent_counts(3, 2, 3, 1, 0) == 1


def test_rank_formula_values():
    assert rank_formulas(2, 2, 2, 1, "full") == 6
    assert rank_formulas(2, 2, 3, 2, "full") == 7
    assert rank_formulas(2, 3, 2, 1, "reg") == 5
    assert rank_formulas(2, 3, 2, 1, "idem") == 5
    assert rank_formulas(2, 3, 2, 2, "ideal:1") == 6
    assert rank_formulas(2, 2, 3, 2, "ideal(1)") == 6
    assert rank_formulas(3, 2, 3, 2, "ideal:2") == rank_formulas(3, 2, 3, 2, "reg")
    assert rank_formulas(3, 2, 2, 2, "full") == 3


def test_rank_formula_refusals():
    with pytest.raises(UnsupportedParameters):
        rank_formulas(2, 2, 2, 2, "reg")
    with pytest.raises(UnsupportedParameters):
        rank_formulas(2, 2, 3, 0, "idem")
    with pytest.raises(UnsupportedParameters):
        rank_formulas(2, 1, 1, 1, "full")
    with pytest.raises(DomainError):
        parse_target("everything")


def test_full_rank_formula_matches_census():
    # every matrix of rank above r is a generator, so the count is a census
    q, m, n, r = 3, 2, 3, 1
    F = O.RefField(q)
    census = sum(1 for X in O.all_matrices(F, m, n) if O.rank(F, X) > r)
    assert rank_formulas(q, m, n, r, "full") == census == 624
