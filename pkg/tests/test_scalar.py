from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkfuse.scalar import I, ONE, ZERO, Scalar, format_scalar, parse_scalar

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=12)
scalars = st.builds(Scalar, fracs, fracs)


def test_i_squared_is_minus_one():
    assert I * I == Scalar(-1)
    assert I.conj() == Scalar(0, -1)


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


@pytest.mark.parametrize("text,value", [
    ("0", Scalar(0)), ("3", Scalar(3)), ("-1/2", Scalar(Fraction(-1, 2))),
    ("i", Scalar(0, 1)), ("-i", Scalar(0, -1)), ("1+2 i", Scalar(1, 2)), ("1/3-1/2 i", Scalar(Fraction(1, 3), Fraction(-1, 2))),
])
def test_parse_examples(text, value):
    assert parse_scalar(text) == value


def test_coerce_rejects_floats():
    with pytest.raises(TypeError):
        Scalar.coerce(0.5)


@given(scalars)
def test_format_parse_round_trip(x):
    assert parse_scalar(format_scalar(x)) == x


@given(scalars, scalars, scalars)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x + ZERO == x and x * ONE == x
    assert x - x == ZERO


@given(scalars, scalars)
def test_product_matches_gaussian_formula(x, y):
    # oracle: (a + bi)(c + di) = (ac - bd) + (ad + bc) i on raw fractions
    a, b, c, d = x.re, x.im, y.re, y.im
    assert x * y == Scalar(a * c - b * d, a * d + b * c)


@given(scalars)
def test_inverse(x):
    if x != ZERO:
        assert x * x.inverse() == ONE
