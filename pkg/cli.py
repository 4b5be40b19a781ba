import functools
import logging
import math
import os
import sys
from typing import Any, Dict, Optional

import click
import pydantic
from dotenv import load_dotenv

import lab
from helpers.errors import ComparisonFailure, LabError
from scenarios.config import PRESETS, build_config, load_config_file

# Load environment variables from .env file
load_dotenv(".env")

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Set up logging
logging.basicConfig(format='%(asctime)s - %(name)s - %(levelname)s - %(message)s', level=LOG_LEVEL)
logger = logging.getLogger(__name__)

PRESET_CHOICE = click.Choice(sorted(PRESETS))


def handle_errors(command):
    """Map laboratory errors to exit codes at the command boundary."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except LabError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except pydantic.ValidationError as e:
            logger.error(f"Invalid configuration: {str(e)}")
            click.echo(f"Invalid configuration: {e.error_count()} problem(s)\n{e}", err=True)
            sys.exit(2)
        except (FileNotFoundError, IsADirectoryError) as e:
            logger.error(f"Cannot read input: {str(e)}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(2)
    return wrapper


def resolve_config(preset: Optional[str], config_path: Optional[str], overrides: Optional[Dict[str, Any]] = None):
    file_data = load_config_file(config_path) if config_path else {}
    if preset is None:
        preset = file_data.get("preset", "custom")
    file_data.pop("preset", None)
    return build_config(preset, file_data, overrides)


def config_options(command):
    command = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                           help="JSON config file; its keys override the preset.")(command)
    command = click.option("--preset", type=PRESET_CHOICE, default=None,
                           help="Scenario preset (default: the config file's, else custom).")(command)
    return command


@click.group()
def cli():
    """Phase-lagged Kuramoto laboratory: simulated vs analytic dynamics."""


@cli.command()
@config_options
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Run directory.")
@click.option("--n", type=int, help="Number of oscillators.")
@click.option("--epsilon", type=float, help="Coupling strength (default: calibrated from the growth-rate gap).")
@click.option("--phi", type=float, help="Phase lag in radians.")
@click.option("--alpha", type=float, help="Power-law decay exponent.")
@click.option("--horizon", type=float, help="Simulated time in seconds.")
@click.option("--dt", type=float, help="Integration step in seconds.")
@click.option("--dt-out", "dt_out", type=float, help="Output sampling interval in seconds.")
@click.option("--seed", type=int, help="Seed for the random initial state.")
@click.option("--subset", "mode_subset", help="Mode labels for the analytic path, e.g. 1-10,216-225.")
@click.option("--data-dir", type=click.Path(file_okay=False), help="Run registry directory.")
@handle_errors
def run(preset, config_path, out_dir, data_dir, **overrides):
    """Run a scenario and write its run directory."""
    config = resolve_config(preset, config_path, overrides)
    record = lab.run_scenario(config, logger, out_dir=out_dir, data_dir=data_dir)
    click.echo(f"{config.preset}: outputs in {os.path.dirname(record.output_paths[-1])}")
    for key, value in record.calibrated_values.items():
        click.echo(f"  calibrated {key} = {value}")


@cli.command()
@click.argument("run_dir", type=click.Path(file_okay=False))
@click.option("--sim", "sim_path", type=click.Path(dir_okay=False), help="Simulated trajectory CSV.")
@click.option("--analytic", "analytic_path", type=click.Path(dir_okay=False), help="Analytic trajectory CSV.")
@click.option("--tolerance", type=float, help="Pass threshold in radians (default: the run manifest's).")
@handle_errors
def compare(run_dir, sim_path, analytic_path, tolerance):
    """Recompute the circular error of a run and check it against its tolerance."""
    try:
        report, tolerance = lab.compare_run(run_dir, logger, sim_path=sim_path, analytic_path=analytic_path,
                                            tolerance=tolerance)
    except ComparisonFailure:
        click.echo("FAIL")
        raise
    click.echo(report.model_dump_json(indent=2))
    click.echo(f"PASS: circular RMSE {report.circular_rmse:.4g} rad < tolerance {tolerance:g} rad")


@cli.command()
@config_options
@click.option("--phi", type=float, help="Phase lag in radians.")
@click.option("--epsilon", type=float, help="Coupling strength.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Spectrum CSV path.")
@handle_errors
def spectrum(preset, config_path, phi, epsilon, out_path):
    """Write the eigenvalues of K for the configured coupling and phase lag."""
    config = resolve_config(preset, config_path, {"phi": phi, "epsilon": epsilon})
    path = lab.export_spectrum(config, logger, out_path=out_path)
    click.echo(str(path))


@cli.command()
@config_options
@click.option("--phi", "phis", type=float, multiple=True, help="Phase lag(s) in radians.")
@click.option("--time", "times", type=float, multiple=True, help="Evaluation time(s) in seconds.")
@click.option("--seeds", type=click.IntRange(min=1), default=20, show_default=True,
              help="Number of random initial states.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Profile CSV path.")
@handle_errors
def profile(preset, config_path, phis, times, seeds, out_path):
    """Ensemble mode-contribution profile over phase lags and times."""
    config = resolve_config(preset, config_path)
    phis = phis or (0.0, 1.15, 1.30, math.pi / 2)
    times = times or (1.0, 10.0)
    path, result = lab.export_profile(config, phis, times, seeds, logger, out_path=out_path)
    for p, phi in enumerate(result.phis):
        gaps = ", ".join(f"{gap:.2f}" for gap in result.mean_gap[p])
        click.echo(f"phi={phi:.4g}: mean dominance gap (decades) {gaps}")
    click.echo(str(path))


@cli.command()
@config_options
@handle_errors
def calibrate(preset, config_path):
    """Run the calibrations a preset relies on and print the chosen values."""
    config = resolve_config(preset, config_path)
    updates = {}
    if config.topology == "power_law":
        updates["calibrate_chimera"] = True
    if config.perturbation is not None:
        updates["calibrate_amplitude"] = True
    config = config.model_copy(update=updates)
    _, epsilon, _, _, calibrated = lab.resolve_parameters(config, logger)
    click.echo(f"{config.preset}: epsilon = {epsilon:.6g}")
    for key, value in calibrated.items():
        click.echo(f"  {key} = {value}")


if __name__ == "__main__":
    cli()
