import click
from flask import Blueprint, current_app

from ..algebra.cremona import compose_detailed, map_to_text, parse_map
from ..services import experiment_service
from ..services.dyndeg import estimate
from ..utils import format_float
from .cli_support import cli_errors, degree_cap

bp = Blueprint("maps", __name__, cli_group=None)


@bp.cli.command("compose")
@click.option("--f", "f_text", required=True, help="Outer map, e.g. '[Y*Z + X^2 : X*Z : Z^2]'.")
@click.option("--g", "g_text", required=True, help="Inner map.")
@click.option("--max-degree", type=click.IntRange(min=1), help="Degree cap (default DEGREE_CAP).")
def compose_command(f_text, g_text, max_degree):
    """Print f∘g in lowest terms with its degree."""
    with cli_errors():
        f = parse_map(f_text)
        g = parse_map(g_text)
        h, raw = compose_detailed(f, g, degree_cap(max_degree))
    current_app.logger.info(f"compose: deg {f.degree} ∘ deg {g.degree} -> {h.degree}")
    click.echo(map_to_text(h))
    click.echo(f"degree: {h.degree}")
    click.echo(f"raw degree: {raw}")


@bp.cli.command("degree")
@click.option("--map", "map_text", required=True, help="Map as '[P0 : P1 : P2]'.")
def degree_command(map_text):
    """Print the degree of a map after reduction to lowest terms."""
    with cli_errors():
        f = parse_map(map_text)
    click.echo(map_to_text(f))
    click.echo(f"degree: {f.degree}")


@bp.cli.command("dyndeg")
@click.option("--config", "config_path", help="Experiment config declaring the generators.")
@click.option("--generator", help="Generator name from the config.")
@click.option("--word", help="Space-separated generator names, composed left to right.")
@click.option("--map", "map_text", help="Map as '[P0 : P1 : P2]' instead of a config.")
@click.option("--budget", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--max-degree", type=click.IntRange(min=1), help="Degree cap (default DEGREE_CAP).")
def dyndeg_command(config_path, generator, word, map_text, budget, max_degree):
    """Dynamical degree: exact where a route exists, else the Fekete upper bound."""
    cap = degree_cap(max_degree)
    if not map_text and not (config_path and (generator or word)):
        raise click.UsageError("give --map, or --config with --generator or --word")
    with cli_errors():
        if map_text:
            result = estimate(parse_map(map_text), budget, cap)
        else:
            generators = experiment_service.load_generators(config_path)
            result = experiment_service.dynamical_degree(
                generators, word or generator, budget, cap
            )
    click.echo(f"lambda1: {format_float(result.value, 9)}")
    click.echo(f"exact: {'yes' if result.exact else 'no'}")
    click.echo(f"route: {result.route}")
    for k, bound in result.upper_bounds:
        click.echo(f"  k={k}: {format_float(bound, 9)}")
    if result.truncated:
        click.echo("truncated: degree cap reached before the budget")
