import pytest
from pydantic import ValidationError

from app.models import AlgebraSpec
from app.services.poisson_service import (ALGEBRA_CACHE_SIZE, algebra_for, casimir_check, clear_algebra_cache,
                                          component_agreement_check, generic_rank, jacobi_check, lower_triangle,
                                          named_map_check, pattern_reduction_check, staircase_pattern)
from app.utils.errors import InvalidPartition, MalformedQListError, WorkbenchError
from app.utils.polynomial import SparsePoly


def v(name):
    return SparsePoly.variable(name)


def test_lie_poisson_bracket_of_first_row():
    alg = algebra_for('B', 2)
    assert alg.pair('b11', 'b12') == -v('b11') * v('b12')
    assert alg.pair('b12', 'b11') == v('b11') * v('b12')


def test_generators_and_memoized_build():
    alg = algebra_for('AB', 2, q='ii')
    assert alg.generators == ['a11', 'a12', 'a21', 'a22', 'b11', 'b12', 'b21', 'b22']
    assert algebra_for('AB', 2, q='ii') is alg
    assert alg.name == 'AB(ii)'


def test_algebra_cache_keeps_only_recent_specs():
    clear_algebra_cache()
    first = algebra_for('B', 1)
    assert algebra_for('B', 1) is first
    for length in range(2, ALGEBRA_CACHE_SIZE + 2):
        algebra_for('B', 1, chain_length=length)
    assert algebra_for('B', 1) is not first
    clear_algebra_cache()


@pytest.mark.parametrize('family,fields', [
    ('A', {}), ('B', {}), ('BC', {}), ('AB', {'q': 'ii'}), ('AB', {'q': 'iii'}),
])
def test_tables_are_antisymmetric(family, fields):
    assert algebra_for(family, 2, **fields).antisymmetry_defects() == []


@pytest.mark.parametrize('family,fields', [
    ('A', {}), ('B', {}), ('AB', {'q': 'i'}), ('AB', {'q': 'ii'}), ('AB', {'q': 'iii'}),
])
def test_jacobi_holds(family, fields):
    outcome = jacobi_check(algebra_for(family, 2, **fields))
    assert outcome.passed, outcome.witness


@pytest.mark.parametrize('family,fields', [
    ('ABC', {'q': 'i'}),
    ('B-chain', {'chain_length': 3}),
    ('B-chain', {'chain_length': 3, 'chain_q': ['iii', 'i']}),
    ('BC-chain', {'chain_length': 2, 'q': 'iii', 'chain_q': ['ii']}),
])
def test_jacobi_holds_on_chains(family, fields, sampler):
    outcome = jacobi_check(algebra_for(family, 2, **fields), backend='modular', sampler=sampler, trials=2)
    assert outcome.passed, outcome.witness


def test_jacobi_fails_for_permutation_coupling():
    outcome = jacobi_check(algebra_for('AB', 2, q='perm'))
    assert not outcome.passed
    assert outcome.witness


def test_modular_jacobi_agrees(sampler):
    outcome = jacobi_check(algebra_for('AB', 2, q='ii'), backend='modular', sampler=sampler, trials=2)
    assert outcome.passed


@pytest.mark.parametrize('kind,N', [('A', 2), ('B', 3), ('b-b', 2)])
def test_component_formulas_match_r_matrix_tables(kind, N):
    outcome = component_agreement_check(kind, N)
    assert outcome.passed, outcome.witness


def test_babt_is_poisson(sampler):
    outcome = named_map_check('BABt', algebra_for('AB', 2, q='ii'), sampler=sampler, trials=3)
    assert outcome.passed, outcome.witness
    assert outcome.details['sign'] == 'poisson'


def test_theta_is_anti_poisson(sampler):
    outcome = named_map_check('theta', algebra_for('BC', 2), sampler=sampler, trials=3)
    assert outcome.passed, outcome.witness
    assert outcome.details['claimed'] == 'anti'


@pytest.mark.parametrize('name,family,fields,claimed', [
    ('frakA-BC', 'ABC', {'q': 'ii'}, 'poisson'),
    ('duality-ABC', 'ABC', {'q': 'ii'}, 'anti'),
    ('S-matrix', 'AB', {'q': 'ii'}, 'poisson'),
    ('bc-chain-drop', 'BC-chain', {'chain_length': 2}, 'poisson'),
    ('bc-chain-product', 'BC-chain', {'chain_length': 2}, 'poisson'),
])
def test_catalog_maps_keep_their_claimed_sign(name, family, fields, claimed, sampler):
    outcome = named_map_check(name, algebra_for(family, 2, **fields), backend='modular', sampler=sampler, trials=2)
    assert outcome.passed, outcome.witness
    assert outcome.details['sign'] == claimed


def test_s_matrix_needs_a_coupled_case():
    with pytest.raises(WorkbenchError):
        named_map_check('S-matrix', algebra_for('AB', 2, q='i'))


def test_casimir_check_rejects_a_generator():
    outcome = casimir_check(algebra_for('B', 2), v('b11'))
    assert not outcome.passed
    assert 'b11' in outcome.witness


def test_generic_rank_of_reflection_algebra(sampler):
    alg = algebra_for('A', 2)
    assert len(alg.generators) - generic_rank(alg, sampler) == 2


def test_chain_q_list_length_is_checked():
    with pytest.raises(MalformedQListError):
        algebra_for('B-chain', 2, chain_length=2, chain_q=['ii', 'iii'])


def test_unknown_family_is_a_schema_error():
    with pytest.raises(ValidationError):
        AlgebraSpec(family='Z', N=2)


def test_staircase_patterns():
    assert staircase_pattern('b', 3, [0, 1, 2]) == lower_triangle('b', 3)
    with pytest.raises(InvalidPartition):
        staircase_pattern('b', 3, [2, 1, 0], kind='lower')


def test_lower_triangle_reduction_of_lie_poisson():
    alg = algebra_for('B', 3)
    outcome = pattern_reduction_check(alg, zero=lower_triangle('b', 3))
    assert outcome.passed, outcome.witness
