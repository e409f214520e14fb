"""Options and error handling shared by the command blueprints."""

from contextlib import contextmanager

import click
from flask import current_app

from ..app_config import BACKENDS
from ..services.experiment_service import exit_status

SEED_MAX = 2**64 - 1


def experiment_options(func):
    """``--config`` plus the walk overrides shared by ``walk`` and ``clt``."""
    options = [
        click.option(
            "--config",
            "config_path",
            required=True,
            help="Experiment config (JSON, schema_version 1).",
        ),
        click.option("--seed", type=click.IntRange(0, SEED_MAX), help="Override walk.seed."),
        click.option("--trials", type=click.IntRange(min=1), help="Override walk.trials."),
        click.option(
            "--length",
            type=click.IntRange(min=0),
            help="Override walk.length; checkpoints beyond it are dropped.",
        ),
        click.option("--backend", type=click.Choice(BACKENDS), help="Override walk.backend."),
        click.option("--workers", type=click.IntRange(min=1), help="Process pool size."),
        click.option("--out", help="Output directory (or CSV file for `walk`)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def degree_cap(value):
    return current_app.config["DEGREE_CAP"] if value is None else value


@contextmanager
def cli_errors():
    """Turn package errors into a one-line diagnostic and the matching exit status."""
    try:
        yield
    except Exception as exc:
        status = exit_status(exc)
        if status is None:
            current_app.logger.error(f"Unexpected error: {exc}", exc_info=True)
            raise
        current_app.logger.debug(f"{type(exc).__name__}: {exc}")
        click.echo(f"error: {exc}", err=True)
        click.get_current_context().exit(status)
