import pytest

from app.services.dirac_service import (but_constraints, degenerate_gram_check, dirac_centrality_check,
                                        dirac_jacobi_check, f_bracket_sign_check, gram_formula_check,
                                        nondegeneracy_probe, solve_F, system_determinant_check, upper_triangularity_check,
                                        upper_unitriangular, validate_partition)
from app.services.poisson_service import algebra_for
from app.utils.errors import InvalidPartition, SingularSystem, WorkbenchError
from app.utils.expr import Expr, MatrixExpr


def test_partition_validation():
    assert validate_partition(3, None) == (1, 1, 1)
    assert validate_partition(3, [2, 1]) == (2, 1)
    with pytest.raises(InvalidPartition):
        validate_partition(3, [2, 2])
    with pytest.raises(InvalidPartition):
        validate_partition(2, [0, 2])


def test_constraints_on_a_fix_the_unitriangular_surface():
    cs = but_constraints(2, which='A')
    assert cs.labels == ['a21', 'a11-1', 'a22-1']
    assert cs.surface == {'a21': 0, 'a11': 1, 'a22': 1}
    assert len(but_constraints(2, which='both')) == 6


def test_block_constraints_use_determinants():
    cs = but_constraints(3, [2, 1], which='A')
    assert cs.labels == ['a31', 'a32', 'det a[1..2]-1', 'a33-1']


def test_unknown_constraint_selector():
    with pytest.raises(WorkbenchError):
        but_constraints(2, which='C')


@pytest.mark.parametrize('n', [2, 3])
def test_system_determinant_is_the_corner_minor_product(n):
    outcome = system_determinant_check(n)
    assert outcome.passed, outcome.witness


@pytest.mark.parametrize('n', [2, 3])
def test_solved_f_makes_bfbt_upper_triangular(n):
    assert upper_triangularity_check(n).passed


def test_singular_system_names_the_vanishing_minor():
    b = Expr.symbol
    B = MatrixExpr([[b('b11'), 0], [b('b21'), b('b22')]])
    with pytest.raises(SingularSystem) as info:
        solve_F(B)
    assert info.value.witness == 'M+_1'


def test_dirac_bracket_is_central_and_poisson(sampler):
    alg = algebra_for('AB', 2, q='ii')
    cs = but_constraints(2)
    assert dirac_centrality_check(alg, cs, sampler, trials=2).passed
    assert dirac_jacobi_check(alg, cs, sampler, trials=1).passed


@pytest.mark.parametrize('case', ['i', 'ii', 'iii'])
def test_f_bracket_signs(case, sampler):
    outcome = f_bracket_sign_check(case, 2, sampler, trials=3)
    assert outcome.passed, outcome.witness
    assert outcome.details['sign'] == ('-' if case == 'i' else '+')


@pytest.mark.parametrize('n', [2, 3])
def test_gram_matches_the_closed_form(n, sampler):
    outcome = gram_formula_check(n, sampler=sampler, trials=2)
    assert outcome.passed, outcome.witness


def test_gram_is_degenerate_without_coupling(sampler):
    outcome = degenerate_gram_check(algebra_for('AB', 2, q='i'), but_constraints(2), sampler, trials=2)
    assert outcome.passed, outcome.witness


def test_nondegeneracy_at_the_identity():
    outcome = nondegeneracy_probe(upper_unitriangular(2), MatrixExpr.identity(2), expected=1)
    assert outcome.passed, outcome.witness
    with pytest.raises(WorkbenchError):
        nondegeneracy_probe(MatrixExpr.symbols('a', 2), MatrixExpr.identity(2))
