import json
import logging

import pytest
from click.testing import CliRunner

from app import EXIT_INTERNAL, EXIT_MISMATCH, EXIT_OK, EXIT_SCHEMA, configure_logging, create_app
from app.utils.file_parser import ScenarioFileError
from config.config import ConfigError, DevelopmentConfig, TestingConfig, config
from run import cli

PASSING = """
name = "cli-pass"

[algebra]
family = "B"
N = 2

[[checks]]
id = "jacobi"
"""

MISMATCH = """
name = "cli-mismatch"

[[checks]]
id = "jacobi"
algebra = { family = "AB", N = 2, q = "perm" }
"""

UNKNOWN = """
name = "cli-unknown"

[[checks]]
id = "no-such-check"
"""


def invoke(*args):
    return CliRunner().invoke(cli, [*args])


def test_run_writes_the_report(scenario_file, tmp_path):
    report = tmp_path / 'report.json'
    result = invoke('run', scenario_file(PASSING), '--report', str(report), '--config', 'testing')
    assert result.exit_code == EXIT_OK, result.output
    assert '1 checks, 1 passed' in result.output
    document = json.loads(report.read_text(encoding='utf-8'))
    assert document['summary']['mismatches'] == 0


def test_mismatch_exits_with_one(scenario_file, tmp_path):
    result = invoke('run', scenario_file(MISMATCH), '--report', str(tmp_path / 'r.json'), '--config', 'testing')
    assert result.exit_code == EXIT_MISMATCH
    assert 'MISMATCH jacobi [fail]' in result.output


def test_unknown_check_exits_with_two(scenario_file, tmp_path):
    result = invoke('run', scenario_file(UNKNOWN), '--report', str(tmp_path / 'r.json'), '--config', 'testing')
    assert result.exit_code == EXIT_SCHEMA
    assert not (tmp_path / 'r.json').exists()


def test_bad_prime_override_exits_with_two(scenario_file, tmp_path):
    result = invoke('run', scenario_file(PASSING), '--prime', '101', '--report', str(tmp_path / 'r.json'),
                    '--config', 'testing')
    assert result.exit_code == EXIT_SCHEMA


def test_unknown_configuration_exits_with_two(scenario_file):
    result = invoke('run', scenario_file(PASSING), '--config', 'staging')
    assert result.exit_code == EXIT_SCHEMA


def test_list_prints_the_catalog():
    result = invoke('list')
    assert result.exit_code == 0
    assert 'Quantum identities:' in result.output
    assert 'AB(ii)' in result.output


def test_error_handlers_map_to_exit_codes(workbench):
    assert workbench.exit_code_for(ScenarioFileError('bad')) == EXIT_SCHEMA
    assert workbench.exit_code_for(ConfigError('bad')) == EXIT_SCHEMA
    assert workbench.exit_code_for(RuntimeError('bad')) == EXIT_INTERNAL


def test_testing_configuration(workbench):
    assert workbench.config['TESTING']
    assert workbench.config['TRIALS'] == 5
    assert workbench.settings().jobs == 1


def test_config_rejects_small_prime(mocker):
    mocker.patch.object(TestingConfig, 'PRIME', 101)
    with pytest.raises(ConfigError):
        create_app('testing')


def test_config_rejects_zero_jobs(mocker):
    mocker.patch.object(TestingConfig, 'JOBS', 0)
    with pytest.raises(ConfigError):
        TestingConfig.validate()


def test_logging_handler_installed_once():
    logger = configure_logging('INFO')
    count = len(logger.handlers)
    configure_logging('DEBUG')
    assert len(logger.handlers) == count
    assert logger.level == logging.DEBUG


def test_default_configuration_is_development():
    assert config['default'] is DevelopmentConfig
    workbench = create_app()
    assert workbench.config_name == 'DevelopmentConfig'
    configure_logging('INFO')
