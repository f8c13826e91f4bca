from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypwalk.laurent import LaurentPoly, NonExactDivision

coeffs = st.dictionaries(st.integers(-6, 6), st.integers(-9, 9), max_size=5)
polys = coeffs.map(LaurentPoly)
nonzero = polys.filter(lambda p: not p.is_zero())


def test_zero_coefficients_dropped():
    p = LaurentPoly({0: 0, 3: 2, -1: 0})
    assert p.coeffs == {3: Fraction(2)}
    assert LaurentPoly({1: 0}).is_zero()


def test_degrees_and_indexing():
    p = LaurentPoly({-2: 1, 4: Fraction(1, 3)})
    assert p.min_degree == -2
    assert p.max_degree == 4
    assert p[4] == Fraction(1, 3)
    assert p[0] == 0


def test_negative_power_of_monomial():
    t = LaurentPoly.t()
    assert t ** -3 == LaurentPoly.monomial(-3)
    with pytest.raises(Exception):
        (t + 1) ** -1


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == LaurentPoly()


@given(polys, nonzero)
@settings(max_examples=200)
def test_divmod_reconstructs(a, b):
    q, r = a.divmod(b)
    assert q * b + r == a


@given(polys, nonzero)
def test_exact_div_of_product(a, b):
    assert (a * b).exact_div(b) == a


def test_exact_div_rejects_remainder():
    t = LaurentPoly.t()
    with pytest.raises(NonExactDivision):
        (t * t + 1).exact_div(t + 1)


@given(polys, st.fractions(min_value=-3, max_value=3).filter(lambda x: x != 0))
def test_evaluation_is_a_homomorphism(a, x):
    b = LaurentPoly({1: 2, -1: 1})
    assert (a * b)(x) == a(x) * b(x)
    assert (a + b)(x) == a(x) + b(x)


@given(polys)
def test_json_round_trip(a):
    assert LaurentPoly.from_json(a.to_json()) == a


def test_shift():
    p = LaurentPoly({0: 1, 2: 3})
    assert p.shift(-1) == LaurentPoly({-1: 1, 1: 3})
