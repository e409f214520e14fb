import click
from flask import Blueprint

from ..app_config import EXIT_CHECKS_FAILED, EXIT_OK, VERIFY_SUITES
from ..services.verify_service import verify_suite
from .cli_support import SEED_MAX, cli_errors

bp = Blueprint("verify", __name__, cli_group=None)


@bp.cli.command("verify")
@click.argument("suite", type=click.Choice(VERIFY_SUITES))
@click.option("--seed", type=click.IntRange(0, SEED_MAX), help="Default: VERIFY_SEED.")
def verify_command(suite, seed):
    """Run a property suite and report counterexamples."""
    with cli_errors():
        report = verify_suite(suite, seed)
    for line in report.lines():
        click.echo(line)
    click.get_current_context().exit(EXIT_OK if report.passed else EXIT_CHECKS_FAILED)
