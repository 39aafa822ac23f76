import numpy as np
import pytest

from app.models import AlgebraSpec
from app.services.casimir_service import (MinorSpec, casimir_family, corner_minor, determinant_prefactor_search,
                                          exponent_matrix, family_check, family_jacobian_rank,
                                          homogeneity_check, matrix_generators, minor, scaling_exponent_check)
from app.services.poisson_service import algebra_for
from app.utils.errors import UnsupportedSystemError, WorkbenchError
from app.utils.expr import MatrixExpr


@pytest.mark.parametrize('N,p', [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_complementary_exponent_blocks_differ_by_two(N, p):
    diff = exponent_matrix('D', N, p) - exponent_matrix('F', N, N - p)
    assert (diff == 2).all()


def test_exponent_matrix_rejects_oversized_block():
    with pytest.raises(WorkbenchError):
        exponent_matrix('D', 2, 3)


def test_corner_minors():
    B = MatrixExpr.symbols('b', 3)
    assert corner_minor(B, MinorSpec('upper-right', 0)).is_one()
    assert minor(B, 'upper-right', 1).to_poly() == B[0, 2].to_poly()
    assert minor(B, 'bottom-left', 1).to_poly() == B[2, 0].to_poly()
    with pytest.raises(WorkbenchError):
        MinorSpec('middle', 1)


def test_upper_right_entry_scales_like_g0(sampler):
    alg = algebra_for('B', 3)
    B = alg.matrix('b')
    outcome = scaling_exponent_check(minor(B, 'upper-right', 1), alg, 'b', exponent_matrix('G0', 3, 1), sampler)
    assert outcome.passed, outcome.witness
    assert outcome.details['measured'] == exponent_matrix('G0', 3, 1).tolist()


def test_lie_poisson_family_is_central(sampler):
    spec = AlgebraSpec(family='B', N=2)
    assert sorted(casimir_family(spec).members) == ['c1', 'c2']
    outcome = family_check(spec, sampler=sampler, trials=3)
    assert outcome.passed, outcome.witness


def test_ab_family_is_central(sampler):
    outcome = family_check(AlgebraSpec(family='AB', N=2, q='ii'), sampler=sampler, trials=3)
    assert outcome.passed, outcome.witness


def test_unknown_member_is_an_error(sampler):
    with pytest.raises(WorkbenchError):
        family_check(AlgebraSpec(family='B', N=2), sampler=sampler, members=['zz'])


def test_case_i_has_no_family():
    with pytest.raises(UnsupportedSystemError):
        casimir_family(AlgebraSpec(family='AB', N=2, q='i'))


def test_family_members_are_independent(sampler):
    family = casimir_family(AlgebraSpec(family='B', N=2))
    assert family_jacobian_rank(family, matrix_generators('b', 2), sampler) == 2


def test_determinant_powers_of_a_central_core(sampler):
    spec = AlgebraSpec(family='B', N=2)
    B = MatrixExpr.symbols('b', 2)
    core = minor(B, 'upper-right', 1) / minor(B, 'bottom-left', 1)
    found = determinant_prefactor_search(spec, core, {'det': B.det()}, span=1, sampler=sampler)
    assert found == [{'det': -1}, {'det': 0}, {'det': 1}]


def test_ratio_of_degree_two_polynomials_is_homogeneous(sampler):
    B = MatrixExpr.symbols('b', 2)
    expr = B.det() / (B[0, 0] * B[1, 1])
    assert homogeneity_check(expr, {'b': matrix_generators('b', 2)}, sampler, trials=2).passed
    assert not homogeneity_check(B.det(), {'b': matrix_generators('b', 2)}, sampler, trials=2).passed


def test_measured_exponents_are_integers(sampler):
    alg = algebra_for('B', 2)
    predicted = np.zeros((2, 2), dtype=int)
    outcome = scaling_exponent_check(alg.matrix('b').det(), alg, 'b', predicted, sampler)
    assert outcome.passed
