import json
import os
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from app.models import AlgebraSpec, CheckOutcome, Scenario
from app.services.check_registry import CheckDefinition
from app.services.scenario_service import (CheckJob, RunSettings, apply_overrides, execute_check, plain,
                                           run_scenario, strip_timing, write_report)
from app.utils.errors import WorkbenchError
from app.utils.file_parser import ScenarioFileError, load_scenario, parse_scenario, read_scenario_document

SCENARIO_DIR = Path(__file__).resolve().parent.parent / 'scenarios'


def job(check_id='jacobi', expect='pass', spec=AlgebraSpec(family='B', N=2), **params):
    return CheckJob(record_id=f"{check_id}-test", check_id=check_id, spec=spec, params=params, expect=expect,
                    backend='symbolic', prime=2305843009213693951, seed=0, trials=2)


def small_scenario(**extra):
    document = {
        'name': 'small',
        'algebra': {'family': 'B', 'N': 2},
        'checks': [
            {'id': 'jacobi', 'label': 'jacobi-B'},
            {'id': 'antisymmetry'},
            {'id': 'jacobi', 'label': 'jacobi-perm', 'algebra': {'family': 'AB', 'N': 2, 'q': 'perm'},
             'expect': 'fail'},
        ],
    }
    document.update(extra)
    return parse_scenario(document)


def test_passing_check_record():
    record = execute_check(job())
    assert record.status == 'pass'
    assert record.matched
    assert record.witness is None
    assert record.elapsed_ms >= 0


def test_expected_failure_keeps_its_witness_in_details():
    record = execute_check(job(spec=AlgebraSpec(family='AB', N=2, q='perm'), expect='fail'))
    assert record.status == 'expected-fail'
    assert record.matched
    assert record.witness is None
    assert record.details['witness']


def test_unexpected_pass_is_a_mismatch():
    record = execute_check(job(expect='fail'))
    assert record.status == 'pass'
    assert not record.matched


def test_domain_errors_become_error_records(mocker):
    def explode(ctx):
        raise WorkbenchError("boom", witness="w")

    mocker.patch('app.services.scenario_service.get_check',
                 return_value=CheckDefinition('jacobi', 'explodes', explode, True))
    record = execute_check(job())
    assert record.status == 'error'
    assert record.witness == 'w'
    assert record.details['error'] == 'WorkbenchError'


def test_failed_outcome_without_witness_still_gets_one(mocker):
    mocker.patch('app.services.scenario_service.get_check',
                 return_value=CheckDefinition('jacobi', 'fails', lambda ctx: CheckOutcome(passed=False), True))
    record = execute_check(job())
    assert record.status == 'fail'
    assert record.witness


def test_plain_values():
    assert plain({'a': Fraction(3), 'b': Fraction(1, 2)}) == {'a': 3, 'b': '1/2'}
    assert plain(np.array([[1, 2]])) == [[1, 2]]
    assert plain((np.int64(4), None, True)) == [4, None, True]


def test_run_scenario_summary_and_order():
    report = run_scenario(small_scenario())
    assert [r.id for r in report.records] == ['antisymmetry', 'jacobi-B', 'jacobi-perm']
    s = report.summary
    assert (s.total, s.passed, s.failed, s.errors, s.expected_failures, s.mismatches) == (3, 2, 0, 0, 1, 0)


def test_overrides_replace_scenario_values():
    scenario = apply_overrides(small_scenario(), {'seed': 7, 'trials': None, 'backend': 'modular'})
    assert scenario.seed == 7
    assert scenario.trials == 20
    assert scenario.backend == 'modular'


def test_report_is_written_atomically(tmp_path):
    report = run_scenario(small_scenario())
    path = write_report(report, str(tmp_path / 'out' / 'report.json'))
    text = Path(path).read_text(encoding='utf-8')
    assert text.endswith('}\n')
    assert os.listdir(tmp_path / 'out') == ['report.json']
    document = json.loads(text)
    assert list(document) == sorted(document)
    assert document['schema_version'] == '1.0'


def test_reports_agree_without_timing():
    first = json.loads(json.dumps(run_scenario(small_scenario()).model_dump(mode='json')))
    second = json.loads(json.dumps(run_scenario(small_scenario()).model_dump(mode='json')))
    assert strip_timing(first) == strip_timing(second)
    assert all('elapsed_ms' not in r for r in strip_timing(first)['records'])


def test_modular_runs_are_reproducible():
    scenario = small_scenario(backend='modular', trials=2)
    first = run_scenario(scenario).model_dump(mode='json')
    second = run_scenario(scenario).model_dump(mode='json')
    assert strip_timing(first) == strip_timing(second)


def test_unknown_check_id_is_a_schema_error():
    with pytest.raises(ScenarioFileError, match='unknown check id'):
        parse_scenario({'name': 'x', 'checks': [{'id': 'no-such-check'}]})


def test_unknown_params_are_a_schema_error():
    with pytest.raises(ScenarioFileError, match='unknown parameters'):
        parse_scenario({'name': 'x', 'algebra': {'family': 'A'}, 'checks': [{'id': 'jacobi', 'params': {'k': 1}}]})


def test_missing_algebra_is_a_schema_error():
    with pytest.raises(ScenarioFileError, match='needs an algebra'):
        parse_scenario({'name': 'x', 'checks': [{'id': 'jacobi'}]})


@pytest.mark.parametrize('document', [
    {'name': 'x', 'prime': 101, 'checks': []},
    {'name': 'x', 'checks': [{'id': 'order-zero'}, {'id': 'order-zero'}]},
    {'name': 'x', 'algebra': {'family': 'A', 'N': 9}, 'checks': []},
    {'name': 'x', 'checks': [], 'extra': 1},
])
def test_invalid_documents(document):
    with pytest.raises(ScenarioFileError):
        parse_scenario(document)


def test_scenario_file_errors(scenario_file, tmp_path):
    with pytest.raises(ScenarioFileError):
        read_scenario_document(str(tmp_path / 'missing.toml'))
    with pytest.raises(ScenarioFileError):
        read_scenario_document(scenario_file('name = "x"', name='scenario.yaml'))
    with pytest.raises(ScenarioFileError):
        read_scenario_document(scenario_file('name = '))


@pytest.mark.parametrize('path', sorted(SCENARIO_DIR.glob('*.toml')), ids=lambda p: p.stem)
def test_shipped_scenarios_validate(path):
    scenario = load_scenario(str(path))
    assert isinstance(scenario, Scenario)
    assert scenario.checks
