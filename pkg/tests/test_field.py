import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import RefField
from sandwichmat.errors import DivideByZero, DomainError, NonMonic, NonPrimeCharacteristic, ReducibleModulus
from sandwichmat.field import (
    enumerate_field,
    field_arith,
    field_isomorphism,
    is_irreducible,
    make_field,
    parse_field,
)

SMALL = [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (2, 3), (3, 2)]


def test_prime_field():
    F = make_field(2)
    assert F.q == 2 and F.is_prime_field


def test_gf4_modulus_is_least_irreducible():
    F = make_field(2, 2)
    assert tuple(F.modulus) == (1, 1, 1)


def test_non_prime_characteristic():
    with pytest.raises(NonPrimeCharacteristic):
        make_field(4, 1)


def test_reducible_modulus():
    with pytest.raises(ReducibleModulus):
        make_field(2, 2, [1, 0, 1])


def test_reference_arithmetic():
    assert field_arith(make_field(3), 2, 2, "add") == 1
    assert field_arith(make_field(2, 2), 2, 2, "mul") == 3
    assert field_arith(make_field(2), 1, None, "inv") == 1


def test_inverse_of_zero():
    with pytest.raises(DivideByZero):
        make_field(5).inv(0)


def test_enumeration_order():
    assert enumerate_field(make_field(2)) == [0, 1]
    assert enumerate_field(make_field(3)) == [0, 1, 2]
    assert enumerate_field(make_field(2, 2)) == [0, 1, 2, 3]


def test_irreducibility():
    assert is_irreducible(2, [1, 1, 1])
    assert not is_irreducible(2, [1, 0, 1])
    assert is_irreducible(3, [0, 1])
    with pytest.raises(NonMonic):
        is_irreducible(3, [1, 1, 2])


@pytest.mark.parametrize("p,k", SMALL)
def test_tables_match_reference(p, k):
    F = make_field(p, k)
    ref = RefField(p, F.modulus)
    for a, b in itertools.product(range(F.q), repeat=2):
        assert F.add(a, b) == ref.add(a, b)
        assert F.mul(a, b) == ref.mul(a, b)
    for a in range(1, F.q):
        assert F.inv(a) == ref.inv(a)


@pytest.mark.parametrize("p,k", [pk for pk in SMALL if pk[0] ** pk[1] <= 9])
def test_axioms_exhaustive(p, k):
    F = make_field(p, k)
    els = range(F.q)
    for a, b, c in itertools.product(els, repeat=3):
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    for a, b in itertools.product(els, repeat=2):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
    for a in els:
        assert F.add(a, F.neg(a)) == 0
        assert F.pow(a, F.q) == a
        if a:
            assert F.mul(a, F.inv(a)) == 1


@pytest.mark.parametrize("p,k", SMALL)
def test_batch_ops_match_scalar(p, k):
    F = make_field(p, k)
    a, b = np.meshgrid(np.arange(F.q), np.arange(F.q), indexing="ij")
    assert np.array_equal(F.badd(a, b), np.vectorize(F.add)(a, b))
    assert np.array_equal(F.bmul(a, b), np.vectorize(F.mul)(a, b))
    assert np.array_equal(F.bsub(a, b), np.vectorize(F.sub)(a, b))
    nz = np.arange(1, F.q)
    assert np.array_equal(F.binv(nz), np.array([F.inv(int(x)) for x in nz]))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 4), (3, 3), (5, 2), (2, 5)]), st.data())
def test_larger_fields_against_reference(pk, data):
    F = make_field(*pk)
    ref = RefField(pk[0], F.modulus)
    a = data.draw(st.integers(0, F.q - 1))
    b = data.draw(st.integers(0, F.q - 1))
    assert F.mul(a, b) == ref.mul(a, b)
    assert F.add(a, b) == ref.add(a, b)


def test_parse_field_literals():
    assert parse_field("3").q == 3
    assert parse_field("2^2").q == 4
    assert parse_field("4").q == 4
    F = parse_field("2^3/1,0,1,1")
    assert tuple(F.modulus) == (1, 0, 1, 1)
    assert parse_field(F.literal) == F
    with pytest.raises(NonPrimeCharacteristic):
        parse_field("6")


def test_order_cap():
    with pytest.raises(DomainError):
        make_field(2, 9)


def test_field_isomorphism_between_moduli():
    F1 = make_field(2, 3, [1, 1, 0, 1])
    F2 = make_field(2, 3, [1, 0, 1, 1])
    phi = field_isomorphism(F1, F2)
    assert sorted(phi.tolist()) == list(range(8))
    for a, b in itertools.product(range(8), repeat=2):
        assert phi[F1.add(a, b)] == F2.add(phi[a], phi[b])
        assert phi[F1.mul(a, b)] == F2.mul(phi[a], phi[b])
    assert field_isomorphism(make_field(2, 2), make_field(3)) is None


def test_multiplicative_order():
    F = make_field(3)
    assert F.mult_order(2) == 2
    assert F.mult_order(1) == 1
