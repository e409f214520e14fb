import os

import click
from flask import Blueprint, current_app

from ..app_config import DEFAULT_OUTPUTS, EXIT_CHECKS_FAILED, EXIT_OK
from ..services import experiment_service
from ..utils import format_float, write_text_atomic
from .cli_support import cli_errors, experiment_options

bp = Blueprint("walks", __name__, cli_group=None)


def _overrides(seed, trials, length, backend, workers, out=None):
    return {
        "seed": seed,
        "trials": trials,
        "length": length,
        "backend": backend,
        "workers": workers,
        "out": out,
    }


def _csv_target(out):
    if out.endswith(".csv"):
        return out
    return os.path.join(out, DEFAULT_OUTPUTS["csv"])


@bp.cli.command("walk")
@experiment_options
def walk_command(config_path, seed, trials, length, backend, workers, out):
    """Trajectories ``trial,step,log_deg`` as CSV (stdout unless --out is given).

    Failed trials and the failure count go to stderr; ``clt`` also records the
    count as ``failed_trials`` in summary.json.
    """
    with cli_errors():
        _, frame, result = experiment_service.run_walk(
            config_path, _overrides(seed, trials, length, backend, workers)
        )
        text = frame.to_csv(index=False)
        if out:
            target = _csv_target(out)
            write_text_atomic(target, text)
            current_app.logger.info(f"Wrote {len(frame)} rows to {target}")
        else:
            click.echo(text, nl=False)
    for failure in result.failures:
        click.echo(
            f"trial {failure.trial} failed at step {failure.step}: {failure.message}", err=True
        )
    click.echo(f"failed trials: {len(result.failures)}", err=True)
    click.get_current_context().exit(EXIT_CHECKS_FAILED if result.failures else EXIT_OK)


@bp.cli.command("clt")
@experiment_options
def clt_command(config_path, seed, trials, length, backend, workers, out):
    """Run an experiment and compare the ensemble with its predicted limit law."""
    with cli_errors():
        outcome = experiment_service.run_experiment(
            config_path, _overrides(seed, trials, length, backend, workers, out)
        )
    summary = outcome.summary
    prediction = summary["prediction"]
    click.echo(f"experiment: {summary['experiment']} ({summary['backend']} backend)")
    click.echo(
        f"predicted law: {prediction['law']} ({prediction['group_type']}), "
        f"ell={format_float(prediction['ell'])}, sigma={format_float(prediction['sigma'])}"
    )
    if summary["estimates"]:
        est = summary["estimates"]
        click.echo(
            f"estimated at n={est['step']}: ell_hat={format_float(est['ell_hat'])}, "
            f"sigma_hat={format_float(est['sigma_hat'])}"
        )
    for record in summary["checks"]:
        verdict = "pass" if record["passed"] else "FAIL"
        if not record["gating"]:
            verdict += " (informational)"
        click.echo(
            f"  n={record['step']}: {record['law_tested']} statistic "
            f"{format_float(record['ks_statistic'])} <= {record['threshold']}: {verdict}"
        )
    if summary["trend"]:
        trend = summary["trend"]
        click.echo(
            f"trend: mean log deg/sqrt(n) {format_float(trend['first_mean'])} at "
            f"n={trend['first_step']} -> {format_float(trend['last_mean'])} at "
            f"n={trend['last_step']}: {'pass' if trend['passed'] else 'FAIL'}"
        )
    if summary["caveat"]:
        click.echo(f"note: {summary['caveat']}")
    click.echo(f"failed trials: {summary['failed_trials']}")
    for path in outcome.written:
        click.echo(f"wrote {path}")
    click.echo("PASSED" if outcome.status == EXIT_OK else "FAILED")
    click.get_current_context().exit(outcome.status)
