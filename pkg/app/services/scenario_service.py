"""
Scenario Service - executes a scenario and assembles its report

Each check becomes a CheckJob carrying everything it needs, so jobs can be
shipped to worker processes. Every job seeds its own sampler from the
scenario seed and its record id; serial and pooled runs therefore draw the
same points and produce the same records.
"""
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np

from app.models import AlgebraSpec, CheckRecord, Report, ReportSummary, Scenario
from app.services.check_registry import CheckContext, get_check
from app.services.poisson_service import clear_algebra_cache
from app.utils.decorators import timed_check
from app.utils.errors import WorkbenchError
from app.utils.ring import PrimeField
from app.utils.sampling import PointSampler

logger = logging.getLogger(__name__)


@dataclass
class CheckJob:
    record_id: str
    check_id: str
    spec: Optional[AlgebraSpec]
    params: Dict[str, Any]
    expect: str
    backend: str
    prime: int
    seed: int
    trials: int
    resample_limit: int = 32
    degree_cap: int = 4


@dataclass
class RunSettings:
    """Values from configuration that scenarios do not carry."""
    jobs: int = 1
    resample_limit: int = 32
    degree_cap: int = 4
    overrides: Dict[str, Any] = field(default_factory=dict)


def plain(value):
    """JSON-ready copy of check details: numbers stay numbers, exotic values become strings."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return str(value)


def _classify(job: CheckJob, passed: bool, witness: Optional[str], details: Dict[str, Any]) -> CheckRecord:
    if passed:
        return CheckRecord(id=job.record_id, check=job.check_id, status='pass', expected=job.expect,
                           matched=job.expect == 'pass', details=details)
    if job.expect == 'fail':
        details = dict(details, witness=witness)
        return CheckRecord(id=job.record_id, check=job.check_id, status='expected-fail', expected='fail',
                           matched=True, details=details)
    return CheckRecord(id=job.record_id, check=job.check_id, status='fail', expected=job.expect, matched=False,
                       witness=witness or 'check failed without a witness', details=details)


@timed_check
def execute_check(job: CheckJob) -> CheckRecord:
    """Run one job; domain errors become an 'error' record, anything else propagates."""
    definition = get_check(job.check_id)
    sampler = PointSampler.for_check(PrimeField(job.prime), job.seed, job.record_id, job.resample_limit)
    ctx = CheckContext(spec=job.spec, params=dict(job.params), backend=job.backend, sampler=sampler,
                       trials=job.trials, degree_cap=job.degree_cap)
    try:
        outcome = definition.run(ctx)
    except WorkbenchError as exc:
        logger.warning(f"Check {job.record_id} raised {type(exc).__name__}: {exc}")
        return CheckRecord(id=job.record_id, check=job.check_id, status='error', expected=job.expect,
                           matched=False, witness=exc.witness or f"{type(exc).__name__}: {exc}",
                           details={'error': type(exc).__name__, 'message': str(exc)})
    return _classify(job, outcome.passed, outcome.witness, plain(outcome.details))


def build_jobs(scenario: Scenario, settings: RunSettings) -> List[CheckJob]:
    return [CheckJob(record_id=check.record_id, check_id=check.id, spec=check.algebra or scenario.algebra,
                     params=dict(check.params), expect=check.expect, backend=scenario.backend,
                     prime=scenario.prime, seed=scenario.seed, trials=scenario.trials,
                     resample_limit=settings.resample_limit, degree_cap=settings.degree_cap)
            for check in scenario.checks]


def apply_overrides(scenario: Scenario, overrides: Dict[str, Any]) -> Scenario:
    """Command-line values replace the scenario's own for one run."""
    update = {k: v for k, v in overrides.items() if v is not None}
    if not update:
        return scenario
    return Scenario.model_validate({**scenario.model_dump(), **update})


def summarize(records: List[CheckRecord]) -> ReportSummary:
    return ReportSummary(
        total=len(records),
        passed=sum(r.status == 'pass' for r in records),
        failed=sum(r.status == 'fail' for r in records),
        errors=sum(r.status == 'error' for r in records),
        expected_failures=sum(r.status == 'expected-fail' for r in records),
        mismatches=sum(not r.matched for r in records),
    )


def run_scenario(scenario: Scenario, settings: Optional[RunSettings] = None) -> Report:
    """Execute every check and assemble the report (records sorted by id)."""
    settings = settings or RunSettings()
    scenario = apply_overrides(scenario, settings.overrides)
    jobs = build_jobs(scenario, settings)
    logger.info(f"Running scenario {scenario.name!r}: {len(jobs)} checks, backend {scenario.backend}, "
                f"{settings.jobs} worker(s)")
    if settings.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=settings.jobs) as pool:
            records = list(pool.map(execute_check, jobs))
    else:
        records = [execute_check(job) for job in jobs]
    clear_algebra_cache()
    report = Report(scenario=scenario.model_dump(mode='json'), records=records, summary=summarize(records))
    logger.info(f"Scenario {scenario.name!r}: {report.summary.passed} passed, {report.summary.failed} failed, "
                f"{report.summary.errors} errors, {report.summary.mismatches} mismatches")
    return report


def report_json(report: Report) -> str:
    return json.dumps(report.model_dump(mode='json'), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def strip_timing(document: Dict[str, Any]) -> Dict[str, Any]:
    """Report document without elapsed times, for golden comparisons."""
    out = dict(document)
    out['records'] = [{k: v for k, v in r.items() if k != 'elapsed_ms'} for r in document['records']]
    return out


def write_report(report: Report, path: str) -> str:
    """Write atomically: temp file in the target directory, then os.replace."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix='.report-', suffix='.json', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(report_json(report))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Report written to {path}")
    return path
