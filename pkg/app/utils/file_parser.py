"""
Utility functions for loading scenario files.

Scenarios are TOML documents; they are validated by the pydantic models and
then against the check registry (known ids, accepted parameters, an algebra
for every check that needs one).
"""
import logging
import os
import tomllib
from typing import Any, Dict, List

from pydantic import ValidationError

from app.models import Scenario
from app.services.check_registry import CHECKS, unknown_params

logger = logging.getLogger(__name__)

SCENARIO_EXTENSIONS = {'toml'}


class ScenarioFileError(Exception):
    """Custom exception for unreadable or schema-invalid scenario files."""
    pass


def allowed_file(filename, allowed_extensions=None):
    """Check if the file extension is allowed."""
    if allowed_extensions is None:
        allowed_extensions = SCENARIO_EXTENSIONS
    return '.' in filename and filename.rsplit('.', 1)[1].lower() in allowed_extensions


def read_scenario_document(file_path: str) -> Dict[str, Any]:
    """Parse the TOML text of a scenario file."""
    if not os.path.isfile(file_path):
        raise ScenarioFileError(f"scenario file not found: {file_path}")
    if not allowed_file(file_path):
        raise ScenarioFileError(f"scenario files must be .toml, got {os.path.basename(file_path)}")
    try:
        with open(file_path, 'rb') as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        logger.error(f"Error parsing scenario file {file_path}: {e}")
        raise ScenarioFileError(f"invalid TOML in {file_path}: {e}")
    except OSError as e:
        raise ScenarioFileError(f"cannot read {file_path}: {e}")


def registry_problems(scenario: Scenario) -> List[str]:
    problems = []
    for check in scenario.checks:
        definition = CHECKS.get(check.id)
        if definition is None:
            problems.append(f"check {check.record_id!r}: unknown check id {check.id!r}")
            continue
        extra = unknown_params(check.id, check.params)
        if extra:
            problems.append(f"check {check.record_id!r}: unknown parameters {extra}")
        if definition.needs_algebra and check.algebra is None and scenario.algebra is None:
            problems.append(f"check {check.record_id!r}: {check.id} needs an algebra")
    return problems


def parse_scenario(document: Dict[str, Any]) -> Scenario:
    """Validate a parsed document; every problem is reported in one ScenarioFileError."""
    try:
        scenario = Scenario.model_validate(document)
    except ValidationError as e:
        raise ScenarioFileError(f"scenario does not match the schema:\n{e}")
    problems = registry_problems(scenario)
    if problems:
        raise ScenarioFileError("\n".join(problems))
    return scenario


def load_scenario(file_path: str) -> Scenario:
    scenario = parse_scenario(read_scenario_document(file_path))
    logger.debug(f"Loaded scenario {scenario.name!r} with {len(scenario.checks)} checks")
    return scenario
