import pytest

from app.services.poisson_service import algebra_for
from app.services.rewriting_service import (GROUPOID_RELATIONS, RELATIONS, NCPolynomial, RewritingSystem,
                                            commutative_image, confluence_check, exchange_rules_from_relations,
                                            index_reversal, is_ordered, letter_class, quantum_automorphism_check,
                                            semiclassical_check, semiclassical_expand,
                                            semiclassical_order_zero_check)
from app.utils.errors import DegreeCapExceeded, WorkbenchError
from app.utils.polynomial import SparsePoly


def test_words_do_not_commute():
    a, b = NCPolynomial.letter('a11'), NCPolynomial.letter('b11')
    assert a * b != b * a
    assert commutative_image(a * b - b * a).is_zero()


def test_b_letters_come_first():
    assert is_ordered(('b11', 'b12', 'a11'))
    assert not is_ordered(('a11', 'b11'))
    assert not is_ordered(('b12', 'b11'))


def test_index_reversal():
    rename = index_reversal(2)
    assert rename['a12'] == 'a21'
    assert rename['b11'] == 'b22'


def test_first_row_exchange_rule():
    rules = {r.pattern: r for r in exchange_rules_from_relations(2, specialize=2, relations=['R-BB'])}
    rule = rules[('b12', 'b11')]
    assert set(rule.output) == {('b11', 'b12')}
    assert rule.output[('b11', 'b12')] == 4


def test_normal_form_applies_the_rule():
    system = RewritingSystem(exchange_rules_from_relations(2, specialize=2, relations=['R-BB']))
    assert system.normal_form(NCPolynomial.word(('b12', 'b11'))) == NCPolynomial.word(('b11', 'b12'), 4)


def test_degree_cap():
    system = RewritingSystem(exchange_rules_from_relations(2, specialize=1, relations=['R-BB']), degree_cap=2)
    with pytest.raises(DegreeCapExceeded):
        system.word_normal_form(('b11', 'b12', 'b21'))


def test_commutative_at_hbar_zero():
    assert semiclassical_order_zero_check(2).passed


def test_lie_poisson_is_the_classical_limit():
    outcome = semiclassical_check('R-BB', 2)
    assert outcome.passed, outcome.witness
    table = semiclassical_expand('R-BB', 2)
    b = SparsePoly.variable
    assert table[('b21', 'b22')] == -b('b21') * b('b22')
    assert table[('b21', 'b22')] == algebra_for('B', 2).pair('b21', 'b22')


def test_b_relations_are_confluent():
    outcome = confluence_check(2, ['R-BB'])
    assert outcome.passed, outcome.witness
    assert outcome.details['overlaps'] > 0


def test_babt_preserves_the_reflection_relation():
    assert quantum_automorphism_check(2).passed


def test_twisted_relation_is_not_preserved():
    outcome = quantum_automorphism_check(2, twist=True)
    assert not outcome.passed
    assert outcome.witness.startswith('entry ')


def test_noncommutative_checks_are_scoped_to_n2():
    with pytest.raises(WorkbenchError):
        quantum_automorphism_check(3)


@pytest.mark.parametrize('relation', ['R-AA', 'R-BB', 'R-AB'])
def test_classical_limit_of_each_relation(relation):
    outcome = semiclassical_check(relation, 2)
    assert outcome.passed, outcome.witness
    assert outcome.details['pairs'] > 0


def test_all_exchange_rules_are_confluent():
    outcome = confluence_check(2, RELATIONS)
    assert outcome.passed, outcome.witness
    assert outcome.details['relations'] == sorted(RELATIONS)


def test_letter_classes():
    assert letter_class('ft12') == 'ft'
    assert letter_class('f21') == 'f'
    assert is_ordered(('b11', 'a11', 'f11', 'ft11'))
    assert not is_ordered(('ft11', 'b22'))


def test_pair_algebra_relations_commute_at_hbar_zero():
    outcome = semiclassical_order_zero_check(2, GROUPOID_RELATIONS)
    assert outcome.passed, outcome.witness
    assert outcome.details['relations'] == list(GROUPOID_RELATIONS)


def test_tilde_exchange_solves_every_ft_b_word():
    rules = exchange_rules_from_relations(2, relations=['R-BFt'])
    patterns = {r.pattern for r in rules}
    assert len(patterns) == 16
    assert all(r.pattern_class == 'ft·b' for r in rules)


@pytest.mark.parametrize('relation,family', [('R-FF-inverse', 'FB-groupoid'), ('R-BFt', 'B-tilde')])
def test_pair_algebra_classical_limit(relation, family):
    outcome = semiclassical_check(relation, 2)
    assert outcome.passed, outcome.witness
    assert outcome.details['family'] == algebra_for(family, 2).name


def test_inverse_reflection_flips_the_sign():
    forward = semiclassical_expand('R-AA', 2)
    inverse = semiclassical_expand('R-FF-inverse', 2)
    rename = {f"a{i}{j}": f"f{i}{j}" for i in (1, 2) for j in (1, 2)}
    assert len(inverse) == len(forward)
    for (x, y), value in forward.items():
        assert inverse[(rename[x], rename[y])] == -value.rename(rename)


def test_unknown_relation_is_an_error():
    with pytest.raises(WorkbenchError):
        exchange_rules_from_relations(2, relations=['R-XX'])
