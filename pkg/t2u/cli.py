import logging
from pathlib import Path
from typing import Optional

import dotenv
import typer
from common.errors import ConfigError, T2UError
from common.settings import configure_logging
from models.scenario import MetricsReport, ScenarioConfig, Scheme
from pydantic import ValidationError
from services.scenario.service import SimulationService, parse_schemes

dotenv.load_dotenv()
logger = logging.getLogger("t2u-cli")

EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

app = typer.Typer(help="Hybrid-field target-to-user association simulator.", no_args_is_help=True)


@app.callback()
def main(log_level: Optional[str] = typer.Option(None, "--log-level", help="Overrides T2U_LOG_LEVEL.")):
    configure_logging(log_level)


def _load(service: SimulationService, config: Optional[Path]):
    if config is None:
        return ScenarioConfig(), None
    return service.load_config(config)


def _echo_report(report: MetricsReport) -> None:
    for name, metrics in report.schemes.items():
        typer.echo(
            f"{name:<11} mean rate {metrics.mean_rate:8.3f} bps/Hz  "
            f"distance RMSE {metrics.distance_rmse:8.4f} m  "
            f"angle RMSE {metrics.angle_rmse:.5f} rad  "
            f"outage@{metrics.outage_threshold:g} {metrics.outage:.4f}"
        )


def _run(action) -> None:
    try:
        action()
    except (ConfigError, ValidationError) as err:
        logger.error(f"Configuration error: {err}")
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    except T2UError as err:
        logger.error(f"Simulation failed: {err}")
        raise typer.Exit(code=EXIT_RUNTIME_ERROR)


@app.command()
def simulate(
    config: Optional[Path] = typer.Option(None, "--config", help="Scenario JSON; default scenario when omitted."),
    scheme: Optional[str] = typer.Option(None, "--scheme", help="Overrides the config scheme."),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Overrides the config seed."),
    trials: Optional[int] = typer.Option(None, "--trials", min=1, help="Overrides the number of trials."),
    out: Path = typer.Option(Path("t2u_output"), "--out", help="Output directory."),
    plot: bool = typer.Option(False, "--plot", help="Also write SVG figures."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Worker processes."),
):
    """
    Runs one scheme and writes epochs.csv and summary.json.
    """

    def action():
        service = SimulationService(output_dir=str(out))
        cfg, base_dir = _load(service, config)
        selected: Optional[Scheme] = parse_schemes(scheme)[0] if scheme else None
        cfg = SimulationService.with_overrides(cfg, scheme=selected, seed=seed, num_trials=trials)

        _echo_report(service.simulate(cfg, workers, base_dir, plot))

    _run(action)


@app.command()
def compare(
    config: Optional[Path] = typer.Option(None, "--config", help="Scenario JSON; default scenario when omitted."),
    schemes: str = typer.Option(
        "GENIE,IMM-PDA,IMM-NN,CV-PDA,CV-NN,RANDOM,IMM-PDA-FF", "--schemes", help="Comma-separated schemes."
    ),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Overrides the config seed."),
    trials: Optional[int] = typer.Option(None, "--trials", min=1, help="Overrides the number of trials."),
    out: Path = typer.Option(Path("t2u_output"), "--out", help="Output directory."),
    plot: bool = typer.Option(False, "--plot", help="Also write SVG figures."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Worker processes."),
):
    """
    Runs several schemes with common random numbers and writes a joint report.
    """

    def action():
        service = SimulationService(output_dir=str(out))
        cfg, base_dir = _load(service, config)
        cfg = SimulationService.with_overrides(cfg, seed=seed, num_trials=trials)

        _echo_report(service.compare(cfg, parse_schemes(schemes), workers, base_dir, plot))

    _run(action)


@app.command()
def trajgen(
    spec: Path = typer.Option(..., "--spec", help="Trajectory spec JSON."),
    out: Path = typer.Option(..., "--out", help="Destination CSV."),
    dt: float = typer.Option(0.75, "--dt", help="Sampling interval in seconds."),
):
    """
    Samples a trajectory spec into the trajectory CSV format.
    """

    def action():
        service = SimulationService(output_dir=str(out.parent))
        traj = service.trajgen(spec, out, dt)
        typer.echo(f"{len(traj)} samples written to {out}")

    _run(action)


if __name__ == "__main__":
    app()
