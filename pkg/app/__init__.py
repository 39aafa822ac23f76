import logging
import os
import sys
from typing import Any, Dict, Optional, Tuple, Type

from config import config

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_SCHEMA = 2
EXIT_INTERNAL = 3

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class Workbench:
    """Configured runner: loads scenarios, executes them and writes reports."""

    def __init__(self, config_class):
        self.config: Dict[str, Any] = {k: getattr(config_class, k) for k in dir(config_class) if k.isupper()}
        self.config_name = config_class.__name__
        self.error_handlers: Dict[Type[BaseException], int] = {}
        self.logger = logging.getLogger('app')

    def errorhandler(self, exc_class: Type[BaseException], exit_code: int):
        self.error_handlers[exc_class] = exit_code

    def exit_code_for(self, exc: BaseException) -> int:
        for exc_class, code in self.error_handlers.items():
            if isinstance(exc, exc_class):
                return code
        return EXIT_INTERNAL

    def settings(self, jobs: Optional[int] = None, **overrides):
        from app.services.scenario_service import RunSettings
        return RunSettings(jobs=jobs or self.config['JOBS'], resample_limit=self.config['RESAMPLE_LIMIT'],
                           degree_cap=self.config['DEGREE_CAP'], overrides=overrides)

    def default_report_path(self, scenario) -> str:
        if scenario.output:
            return scenario.output
        return os.path.join(self.config['REPORT_DIR'], f"{scenario.name}.json")

    def run(self, scenario_path: str, report_path: Optional[str] = None, jobs: Optional[int] = None,
            **overrides) -> Tuple[Any, str, int]:
        """Load, execute and write one scenario; returns (report, path, exit status)."""
        from app.services.scenario_service import run_scenario, write_report
        from app.utils.file_parser import load_scenario

        scenario = load_scenario(scenario_path)
        report = run_scenario(scenario, self.settings(jobs, **overrides))
        path = write_report(report, report_path or self.default_report_path(scenario))
        status = EXIT_OK if report.summary.mismatches == 0 else EXIT_MISMATCH
        return report, path, status


def configure_logging(level: str):
    """Stream handler on the 'app' logger, installed once."""
    logger = logging.getLogger('app')
    logger.setLevel(level.upper())
    if not any(getattr(h, '_workbench', False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._workbench = True
        logger.addHandler(handler)
    return logger


def create_app(config_name='default'):
    """Application factory function."""
    config_class = config.config[config_name]
    config_class.validate()

    workbench = Workbench(config_class)
    configure_logging(workbench.config['LOG_LEVEL'])
    workbench.logger.debug(f"Using configuration: {config_name}")

    register_error_handlers(workbench)
    return workbench


def register_error_handlers(workbench):
    """Map exception classes to exit codes; anything unmapped exits with 3."""
    from pydantic import ValidationError

    from app.utils.file_parser import ScenarioFileError
    from config.config import ConfigError

    workbench.errorhandler(ScenarioFileError, EXIT_SCHEMA)
    workbench.errorhandler(ValidationError, EXIT_SCHEMA)
    workbench.errorhandler(ConfigError, EXIT_SCHEMA)
