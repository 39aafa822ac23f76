import pytest

from app.models import AlgebraSpec
from app.services.check_registry import CHECKS, CheckContext, catalog_listing, get_check, unknown_params
from app.utils.errors import WorkbenchError


def test_unknown_check_id():
    with pytest.raises(WorkbenchError) as info:
        get_check('no-such-check')
    assert info.value.witness == 'no-such-check'


def test_unknown_params_are_listed_sorted():
    assert unknown_params('jacobi', {'zeta': 1, 'alpha': 2}) == ['alpha', 'zeta']
    assert unknown_params('identity', {'entry': 'R-YB', 'N': 3}) == []


def test_algebra_requirements():
    assert get_check('jacobi').needs_algebra
    assert not get_check('identity-suite').needs_algebra


def test_context_size_prefers_params(sampler):
    spec = AlgebraSpec(family='B', N=3)
    ctx = CheckContext(spec=spec, params={}, backend='symbolic', sampler=sampler, trials=1)
    assert ctx.N == 3
    ctx = CheckContext(spec=spec, params={'N': 2}, backend='symbolic', sampler=sampler, trials=1)
    assert ctx.N == 2
    ctx = CheckContext(spec=None, params={}, backend='symbolic', sampler=sampler, trials=1)
    assert ctx.N == 2
    with pytest.raises(WorkbenchError):
        ctx.param('entry')


def test_report_only_identity_always_passes(sampler):
    ctx = CheckContext(spec=None, params={'entry': 'CYBE', 'N': 2}, backend='symbolic', sampler=sampler, trials=1)
    outcome = get_check('identity').run(ctx)
    assert outcome.passed
    assert 'holds' in outcome.details


def test_listing_sections():
    lines = catalog_listing()
    sections = [line for line in lines if not line.startswith('  ')]
    assert sections == ['Families:', 'Checks:', 'Maps:', 'Quantum identities:']
    assert '  AB(ii)' in lines
    identities = lines[lines.index('Quantum identities:') + 1:]
    assert len(identities) >= 12
    assert any(line.strip().startswith('YB-MN ') for line in identities)
    checks = lines[lines.index('Checks:') + 1:lines.index('Maps:')]
    assert len(checks) == len(CHECKS)
    assert checks == sorted(checks)


def test_listing_is_stable():
    assert catalog_listing() == catalog_listing()
