import pytest

from app.services.groupoid_service import (f_reduction_check, f_tilde_reduction_check, groupoid_algebra,
                                           groupoid_constraints, lagrangian_check, lower_block_cells,
                                           projection_check, separation_check)
from app.services.poisson_service import algebra_for, component_agreement_check, jacobi_check
from app.utils.errors import InvalidPartition, WorkbenchError


def test_pair_algebra_is_poisson():
    alg = groupoid_algebra(2)
    assert alg.generators[:4] == ['f11', 'f12', 'f21', 'f22']
    assert jacobi_check(alg).passed


def test_component_formula_of_the_mixed_bracket():
    assert component_agreement_check('plb', 2).passed


@pytest.mark.parametrize('N', [2, 3])
def test_conjugated_f_separates_from_f(N):
    outcome = separation_check(N)
    assert outcome.passed, outcome.witness


def test_source_and_target_projections(sampler):
    outcome = projection_check(2, sampler=sampler, trials=2)
    assert outcome.passed, outcome.witness
    assert outcome.details['maps']['fb-source'] == 'anti'
    assert outcome.details['maps']['fb-target'] == 'poisson'


def test_three_copy_constraints_commute():
    assert lagrangian_check(2).passed


def test_groupoid_constraints_need_three_copies():
    with pytest.raises(WorkbenchError):
        groupoid_constraints(groupoid_algebra(2))
    families, surface = groupoid_constraints(algebra_for('FB-triple', 2))
    assert sorted(families) == ['f', 'g', 'h']
    assert len(surface) == 12


def test_lower_block_cells():
    assert lower_block_cells(3) == [(1, 0), (2, 0), (2, 1)]
    assert lower_block_cells(3, [2, 1]) == [(2, 0), (2, 1)]
    with pytest.raises(InvalidPartition):
        lower_block_cells(3, [4])


def test_block_upper_triangular_f_reduces():
    outcome = f_reduction_check(3)
    assert outcome.passed, outcome.witness
    assert outcome.details['blocks'] == [1, 1, 1]


def test_block_upper_triangular_f_tilde_reduces(sampler):
    outcome = f_tilde_reduction_check(3, sampler=sampler, trials=2)
    assert outcome.passed, outcome.witness
