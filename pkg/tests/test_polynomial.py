from fractions import Fraction

import pytest

from app.utils.errors import DivisionByZero, NotPolynomialError
from app.utils.polynomial import SparsePoly, poly_sum

x = SparsePoly.variable('x')
y = SparsePoly.variable('y')


def test_like_terms_cancel():
    p = x * y + 3 * x - x * y
    assert p == 3 * x
    assert (x - x).is_zero()


def test_coefficients_are_exact():
    p = x * Fraction(1, 3) + x * Fraction(2, 3)
    assert p == x


def test_partial_derivatives():
    p = x ** 3 * y + 2 * y
    assert p.partial('x') == 3 * x ** 2 * y
    assert p.partial('y') == x ** 3 + 2
    assert p.partial('z').is_zero()


def test_laurent_monomials_invert():
    m = 2 * x * y ** 2
    assert m * m.monomial_inverse() == SparsePoly.one()
    assert (x ** -2).degree_in('x') == -2
    assert (x ** -2 + y).degree_in('x') == 0
    assert (x ** -2).min_degree_in('x') == -2


def test_only_monomials_invert():
    with pytest.raises(NotPolynomialError):
        (x + y).monomial_inverse()
    with pytest.raises(DivisionByZero):
        x / SparsePoly.zero()


def test_evaluate_and_substitute():
    p = x * x - y
    assert p.evaluate({'x': Fraction(3), 'y': Fraction(2)}) == 7
    assert p.substitute({'y': x * x}).is_zero()


def test_evaluate_negative_power_at_zero():
    with pytest.raises(DivisionByZero):
        (x ** -1).evaluate({'x': 0})


def test_invert_variable_and_rename():
    s = SparsePoly.variable('s')
    p = s ** 2 + s ** -1
    assert p.invert_variable('s') == s ** -2 + s
    assert p.rename({'s': 't'}).variables() == frozenset({'t'})


def test_coefficients_in_splits_by_exponent():
    s = SparsePoly.variable('s')
    parts = (3 * s * x + s ** -1 + x).coefficients_in('s')
    assert parts == {1: 3 * x, -1: SparsePoly.one(), 0: x}


def test_poly_sum_matches_repeated_addition():
    items = [x, y, -x, 2 * y]
    assert poly_sum(items) == 3 * y
