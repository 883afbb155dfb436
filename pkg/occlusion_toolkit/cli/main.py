# SPDX-License-Identifier: Apache-2.0

"""CLI interface for the occlusion toolkit."""

import sys
from functools import wraps
from typing import Any, Callable, Dict, List, Optional

import click
from loguru import logger

from ..bench.report import summary_table
from ..core.config import config, load_run_config
from ..core.exceptions import OcclusionToolkitError
from .pipeline import run_bench, run_fit, run_guidance, run_render


def _csv_list(cast: Callable[[str], Any]):
    def convert(ctx, param, value: Optional[str]) -> Optional[List[Any]]:
        if value is None:
            return None
        try:
            return [cast(item.strip()) for item in value.split(",") if item.strip()]
        except ValueError:
            raise click.BadParameter(f"expected a comma separated list, got '{value}'")

    return convert


def run_options(func):
    """Flags shared by every subcommand."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Run configuration ([section] / key = value, or YAML)"),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Root seed"),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory"),
        click.option("--threads", type=click.IntRange(min=0), help="Worker cap (0 = auto)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def model_options(func):
    """Model selection and parameter flags."""
    options = [
        click.option("--model", type=click.Choice(["raindrop", "dirt", "fog", "composite"]), help="Occlusion model"),
        click.option("--variant", type=click.Choice(["full", "refract", "gaussian"]), help="Raindrop variant"),
        click.option("--sigma", type=float, help="Blur sigma (raindrop, dirt)"),
        click.option("--alpha", type=float, help="Dirt opacity"),
        click.option("--beta", type=float, help="Fog attenuation coefficient"),
        click.option("--sources", type=click.Path(file_okay=False), help="Clean source image directory"),
        click.option("--depth", type=click.Path(), help="Depth PGM or directory of <stem>.pgm files"),
        click.option("--udisp", type=click.Path(dir_okay=False), help="Horizontal displacement PGM"),
        click.option("--vdisp", type=click.Path(dir_okay=False), help="Vertical displacement PGM"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load(options: Dict[str, Any]):
    overrides = {
        "seed": options.get("seed"),
        "threads": options.get("threads"),
        "gamma": options.get("gamma"),
        "paths.out": options.get("out"),
        "paths.sources": options.get("sources"),
        "paths.targets": options.get("targets"),
        "paths.depth": options.get("depth"),
        "paths.udisp": options.get("udisp"),
        "paths.vdisp": options.get("vdisp"),
        "paths.critic": options.get("critic_file"),
        "paths.overlay": options.get("overlay"),
        "model.name": options.get("model"),
        "model.variant": options.get("variant"),
        "model.params.sigma": options.get("sigma"),
        "model.params.alpha": options.get("alpha"),
        "model.params.beta": options.get("beta"),
        "cma.population": options.get("population"),
        "estimate.max_iters": options.get("max_iters"),
        "estimate.restarts": options.get("restarts"),
        "bench.models": options.get("models"),
        "bench.seeds": options.get("seeds"),
        "bench.images": options.get("images"),
        "bench.size": options.get("size"),
    }
    if options.get("only_differentiable"):
        overrides["estimate.only_differentiable"] = True
    if options.get("no_landscape"):
        overrides["bench.landscape"] = False
    return load_run_config(options.get("config_path"), overrides)


def handle_errors(action: str):
    """Log failures and exit with the error's exit code."""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except OcclusionToolkitError as e:
                logger.error(f"{action} failed: {e}")
                sys.exit(e.exit_code)
            except Exception as e:
                logger.error(f"{action} failed: {e}")
                sys.exit(1)

        return wrapper

    return decorator


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug logging")
def cli(debug):
    """Occlusion Toolkit - render and estimate physical occlusion effects."""
    if debug:
        logger.remove()
        logger.add(sys.stderr, level="DEBUG")
    else:
        logger.remove()
        logger.add(sys.stderr, level=config.LOG_LEVEL)


@cli.command()
@run_options
@model_options
@click.option("--overlay", type=click.Path(dir_okay=False), help="Composite overlay PNG")
@handle_errors("Render")
def render(**options):
    """Render an occlusion model over every source image."""
    cfg = _load(options)
    written = run_render(cfg)
    click.echo(f"Rendered {len(written)} image(s) to {cfg.paths.out}")


@cli.command()
@run_options
@model_options
@click.option("--targets", type=click.Path(file_okay=False), help="Target image directory")
@click.option("--critic-file", type=click.Path(dir_okay=False), help="Fitted .critic file")
@click.option("--population", type=click.IntRange(min=2), help="CMA-ES population size")
@click.option("--max-iters", type=click.IntRange(min=1), help="Gradient iterations per run")
@click.option("--restarts", type=click.IntRange(min=1), help="Repeated seeded runs, best kept")
@click.option("--only-differentiable", is_flag=True, help="Freeze non-differentiable parameters")
@handle_errors("Fit")
def fit(**options):
    """Estimate model parameters that match the target images."""
    cfg = _load(options)
    outcome = run_fit(cfg)
    click.echo(f"Final loss {outcome.loss:.6g} (run {outcome.restart + 1})")
    for name, value in outcome.params.items():
        click.echo(f"  {name} = {value:.6g}")


@cli.command()
@run_options
@click.option("--sources", type=click.Path(file_okay=False), help="Clean source image directory")
@click.option("--targets", type=click.Path(file_okay=False), help="Target images to fit a critic on")
@click.option("--critic-file", type=click.Path(dir_okay=False), help="Fitted .critic file")
@click.option("--gamma", type=click.FloatRange(0.0, 1.0), help="Guidance threshold")
@handle_errors("Guidance")
def guidance(**options):
    """Compute the disentanglement guidance map and injection mask."""
    cfg = _load(options)
    dg_path, mask_path = run_guidance(cfg)
    click.echo(f"Guidance map: {dg_path}")
    click.echo(f"Injection mask: {mask_path}")


@cli.command()
@run_options
@click.option("--models", callback=_csv_list(str), help="Comma separated models, e.g. raindrop,fog")
@click.option("--seeds", callback=_csv_list(int), help="Comma separated seeds, e.g. 1,2,3")
@click.option("--images", type=click.IntRange(min=2), help="Size of the procedural corpus")
@click.option("--size", type=click.IntRange(min=16), help="Side length of corpus images")
@click.option("--max-iters", type=click.IntRange(min=1), help="Gradient iterations per recovery run")
@click.option("--no-landscape", is_flag=True, help="Skip the loss landscape sweep")
@handle_errors("Bench")
def bench(**options):
    """Run the parameter recovery bench."""
    cfg = _load(options)
    result = run_bench(cfg)
    for line in summary_table(result):
        click.echo(line)
    if not result.passed:
        logger.error("Bench failed: recovery tolerances not met")
        sys.exit(1)


@cli.command()
def config_info():
    """Show current configuration."""
    click.echo("Occlusion Toolkit Configuration:")
    click.echo(f"  Output Directory: {config.OUTPUT_DIR}")
    click.echo(f"  Log Level: {config.LOG_LEVEL}")
    click.echo(f"  Threads: {config.THREADS}")
    click.echo(f"  Depth Meters Per Unit: {config.DEPTH_METERS_PER_UNIT}")
    click.echo(f"  Critic: {config.CRITIC}")
    click.echo(f"  Gamma: {config.GAMMA}")


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
