import pytest

from app.services.quantum_service import CATALOG, R, catalog_listing, identity_check, identity_suite
from app.utils.errors import WorkbenchError
from app.utils.tensor import LegMatrix

PASSING = ['R-inverse', 'R-inverse-left', 'R-comm-t1', 'R-comm-t2', 'R-perm-minus', 'R-YB', 'YB-new', 'RR-int',
           'YB-another', 'R23-perm-t3-minus', 'R-MN-inverse', 'R-1', 'R-2', 'R-AB-mn-swap', 'YB-MN', 'YB-new-mn']
FAILING = ['R-perm', 'R-perm-unit', 'R23-perm-t3']


def test_catalog_expectations():
    assert sorted(e.id for e in CATALOG.values() if e.expected == 'pass') == sorted(PASSING)
    assert sorted(e.id for e in CATALOG.values() if e.expected == 'fail') == sorted(FAILING)
    assert sorted(e.id for e in CATALOG.values() if e.expected == 'report') == ['CYBE', 'R-3']


@pytest.mark.parametrize('entry_id', PASSING)
def test_passing_identities_hold_at_n2(entry_id):
    outcome = identity_check(entry_id, 2)
    assert outcome.passed, outcome.witness


@pytest.mark.parametrize('entry_id', FAILING)
def test_misstated_identities_fail_with_a_witness(entry_id):
    outcome = identity_check(entry_id, 2)
    assert not outcome.passed
    assert outcome.witness.startswith('entry ')


def test_r_times_inverse_parameter_is_identity():
    assert R(2) @ R(2, inverse_q=True) == LegMatrix.identity(2, 2)


def test_yang_baxter_at_n3():
    assert identity_check('R-YB', 3).passed


def test_suite_matches_every_expectation():
    results = identity_suite(2)
    assert set(results) == set(CATALOG)
    assert all(r['matched'] for r in results.values())


def test_suite_skips_entries_above_their_size():
    results = identity_suite(3)
    assert 'YB-MN' not in results
    assert 'R-YB' in results


def test_unknown_identity_and_oversized_n():
    with pytest.raises(WorkbenchError):
        identity_check('R-unknown', 2)
    with pytest.raises(WorkbenchError):
        identity_check('YB-MN', 3)


def test_listing_is_sorted():
    lines = catalog_listing()
    assert len(lines) == len(CATALOG)
    assert lines == sorted(lines)
