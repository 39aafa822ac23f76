from fractions import Fraction

import pytest

from app.utils.errors import DivisionByZero, WorkbenchError
from app.utils.ring import (DEFAULT_PRIME, DualValue, PrimeField, PrimeFieldElement,
                            TruncatedSeries, lift_signed, theta)


def test_theta_is_half_at_zero():
    assert theta(3) == 1
    assert theta(0) == Fraction(1, 2)
    assert theta(-2) == 0


def test_prime_field_rejects_small_or_composite_modulus():
    with pytest.raises(WorkbenchError):
        PrimeField(101)
    with pytest.raises(WorkbenchError):
        PrimeField(2 ** 61)


def test_field_arithmetic_and_signed_representative(field):
    x = field(5)
    assert (x * x.inverse()) == field.one
    assert (field(0) - 3).signed() == -3
    assert lift_signed(field(-7)) == -7
    assert field(Fraction(1, 2)) * 2 == 1


def test_zero_inverse_raises(field):
    with pytest.raises(DivisionByZero):
        field.zero.inverse()


def test_mixed_moduli_are_rejected():
    a = PrimeFieldElement(1, DEFAULT_PRIME)
    b = PrimeFieldElement(1, 2147483659)
    with pytest.raises(WorkbenchError):
        a + b


def test_sqrt_of_square(field):
    x = field(123456789)
    root = field.sqrt(x * x)
    assert root * root == x * x


def test_error_bound_scales_with_degree(field):
    assert field.error_bound(4) == Fraction(4, DEFAULT_PRIME)


def test_dual_value_product_rule():
    x = DualValue(3, 1)
    y = x * x
    assert y.value == 9
    assert y.derivative == 6


def test_truncated_exp_coefficients():
    series = TruncatedSeries.exp(2, order=2)
    assert series.coefficients == (1, 2, 2)


def test_truncated_series_inverse():
    series = TruncatedSeries([1, 3, 5], order=2)
    assert series * series.inverse() == TruncatedSeries([1], order=2)


def test_series_with_zero_constant_term_has_no_inverse():
    with pytest.raises(DivisionByZero):
        TruncatedSeries([0, 1], order=2).inverse()
