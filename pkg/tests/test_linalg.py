from fractions import Fraction

import pytest

from app.utils.errors import DivisionByZero
from app.utils.linalg import det, inverse, matmul, rank, solve


def test_rank_of_dependent_rows():
    assert rank([[1, 2, 3], [2, 4, 6], [0, 1, 1]]) == 2


def test_det_over_rationals():
    assert det([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]) == 1


def test_det_over_prime_field(field):
    m = [[field(2), field(3)], [field(4), field(5)]]
    assert det(m, one=field.one) == -2


def test_solve_and_inverse():
    m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    assert solve(m, [Fraction(3), Fraction(2)]) == [1, 1]
    inv = inverse(m, one=Fraction(1), zero=Fraction(0))
    assert matmul(m, inv, zero=Fraction(0)) == [[1, 0], [0, 1]]


def test_singular_system_raises():
    with pytest.raises(DivisionByZero):
        solve([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], [Fraction(1), Fraction(1)])
