import os
import sys
from typing import Optional

import click
from dotenv import load_dotenv

from app import EXIT_INTERNAL, EXIT_SCHEMA, create_app

load_dotenv()


def _workbench(config_name: Optional[str]):
    # Get configuration from environment or use default
    name = config_name or os.getenv('WORKBENCH_CONFIG', 'default')
    try:
        return create_app(name)
    except KeyError:
        click.echo(f"unknown configuration {name!r}", err=True)
        sys.exit(EXIT_SCHEMA)
    except Exception as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_SCHEMA)


@click.group()
def cli():
    """Exact verification workbench for quadratic Poisson algebras and R-matrix identities."""


@cli.command('run')
@click.argument('scenario_file', type=click.Path())
@click.option('--backend', type=click.Choice(['symbolic', 'modular']), default=None,
              help='Override the scenario backend')
@click.option('--prime', type=int, default=None, help='Modulus of the modular backend (prime above 2^31)')
@click.option('--seed', type=int, default=None, help='Base seed for random evaluation points')
@click.option('--trials', type=int, default=None, help='Random points per modular check')
@click.option('--report', 'report_path', type=click.Path(), default=None,
              help='Report file (default: scenario output or REPORT_DIR/<name>.json)')
@click.option('--jobs', type=int, default=None, help='Worker processes (1 runs in-process)')
@click.option('--config', 'config_name', default=None, help='Configuration name (development, testing, production)')
def run_command(scenario_file: str, backend: Optional[str], prime: Optional[int], seed: Optional[int],
                trials: Optional[int], report_path: Optional[str], jobs: Optional[int], config_name: Optional[str]):
    """Run every check of SCENARIO_FILE and write its report."""
    workbench = _workbench(config_name)
    try:
        report, path, status = workbench.run(scenario_file, report_path=report_path, jobs=jobs,
                                             backend=backend, prime=prime, seed=seed, trials=trials)
    except Exception as exc:
        code = workbench.exit_code_for(exc)
        if code == EXIT_INTERNAL:
            workbench.logger.exception("Internal error while running scenario")
        click.echo(f"error: {exc}", err=True)
        sys.exit(code)

    s = report.summary
    click.echo(f"{report.scenario['name']}: {s.total} checks, {s.passed} passed, {s.failed} failed, "
               f"{s.errors} errors, {s.expected_failures} expected failures")
    for record in report.records:
        if not record.matched:
            click.echo(f"  MISMATCH {record.id} [{record.status}] {record.witness or ''}".rstrip())
    click.echo(f"Report: {path}")
    sys.exit(status)


@cli.command('list')
def list_command():
    """List algebra families, check ids, maps and quantum identities."""
    from app.services.check_registry import catalog_listing

    for line in catalog_listing():
        click.echo(line)


if __name__ == '__main__':
    cli()
