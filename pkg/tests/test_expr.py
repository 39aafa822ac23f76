from fractions import Fraction

import pytest

from app.utils.errors import DivisionByZero, NotPolynomialError
from app.utils.expr import Expr, MatrixExpr, entry_symbol
from app.utils.polynomial import SparsePoly


def test_entry_symbols():
    assert entry_symbol('A', 1, 2) == 'a12'
    assert entry_symbol('b2', 3, 1) == 'b2_31'


def test_polynomial_subterms_fold_into_leaves():
    x, y = Expr.symbol('x'), Expr.symbol('y')
    e = (x + y) * (x - y)
    assert e.is_poly_leaf()
    assert e.to_poly() == SparsePoly.variable('x') ** 2 - SparsePoly.variable('y') ** 2


def test_quotients_are_not_polynomials():
    q = Expr.symbol('x') / Expr.symbol('y')
    assert not q.is_polynomial()
    with pytest.raises(NotPolynomialError):
        q.to_poly()
    num, den = q.numerator_denominator()
    assert num == SparsePoly.variable('x')
    assert den == SparsePoly.variable('y')


def test_division_by_vanishing_denominator():
    q = Expr.const(1) / (Expr.symbol('x') - 1)
    with pytest.raises(DivisionByZero):
        q.evaluate({'x': Fraction(1)})


def test_derivative_of_quotient():
    x = Expr.symbol('x')
    q = x * x / (x + 1)
    dual = q.derivative_at({'x': Fraction(1)}, 'x')
    assert dual.value == Fraction(1, 2)
    assert dual.derivative == Fraction(3, 4)


def test_symbolic_determinant():
    A = MatrixExpr.symbols('a', 2)
    a = {n: SparsePoly.variable(n) for n in ('a11', 'a12', 'a21', 'a22')}
    assert A.det().to_poly() == a['a11'] * a['a22'] - a['a12'] * a['a21']


def test_inverse_times_matrix_is_identity_at_a_point(field, sampler):
    A = MatrixExpr.symbols('a', 3)
    point = sampler.point(sorted(A.variables()))
    product = (A.inverse() @ A).evaluate(point)
    for i in range(3):
        for j in range(3):
            assert product[i][j] == (1 if i == j else 0)


def test_substitute_symbol_by_quotient():
    x, y = Expr.symbol('x'), Expr.symbol('y')
    e = (x * x).substitute({'x': Expr.const(1) / y})
    assert e.evaluate({'y': Fraction(2)}) == Fraction(1, 4)
