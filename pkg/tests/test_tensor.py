from fractions import Fraction

import pytest

from app.utils.errors import LegIndexError
from app.utils.expr import MatrixExpr
from app.utils.tensor import (LegMatrix, classical_r, embed, kron, permutation_p, q_matrix,
                              triangular_project, unit_matrix)


def test_kron_puts_first_factor_on_leading_leg():
    m = kron(unit_matrix(2, 1, 2), unit_matrix(2, 2, 1))
    assert m.entry((0, 1), (1, 0)) == 1
    assert len(m.entries) == 1


def test_permutation_squares_to_identity():
    P = permutation_p(3)
    assert P @ P == LegMatrix.identity(3, 2)


def test_permutation_swaps_embedded_legs():
    P = permutation_p(2)
    E = unit_matrix(2, 1, 2)
    assert P @ embed(E, 1, 2) @ P == embed(E, 2, 2)


def test_classical_r_entries():
    r = classical_r(2)
    # diagonal weight 2·θ(0) = 1, strict part only for i > j
    assert r.entry((0, 0), (0, 0)) == 1
    assert r.entry((1, 0), (0, 1)) == 2
    assert r.entry((0, 1), (1, 0)) == 0


def test_partial_transpose_is_an_involution():
    r = classical_r(3)
    assert r.partial_transpose(1).partial_transpose(1) == r
    assert r.partial_transpose(1).partial_transpose(2) == r.transpose()


def test_q_selectors():
    N = 2
    assert q_matrix(N, 'i') == LegMatrix.zero(N, 2)
    assert q_matrix(N, 'perm') == permutation_p(N)
    assert q_matrix(N, 'ii') == -classical_r(N).partial_transpose(2)


def test_leg_out_of_range():
    r = classical_r(2)
    with pytest.raises(LegIndexError):
        r.partial_transpose(3)
    with pytest.raises(LegIndexError):
        r.place((1, 4), 3)


def test_first_difference_reports_the_entry():
    a = LegMatrix.identity(2, 1)
    b = LegMatrix.from_dense([[1, 0], [0, 2]], 2)
    row, col, lhs, rhs = a.first_difference(b)
    assert (row, col) == ((1,), (1,))
    assert (lhs, rhs) == (1, 2)


def test_triangular_projection_weights_the_diagonal():
    m = MatrixExpr.symbols('x', 2)
    upper = triangular_project(m, '+', Fraction(1, 2))
    assert upper[1, 0].is_zero()
    assert upper[0, 1].to_poly() == m[0, 1].to_poly()
    assert upper[0, 0].to_poly() == m[0, 0].to_poly() * Fraction(1, 2)
