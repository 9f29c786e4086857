import asyncio
import logging
import sys
from typing import Any, Dict, List, Optional

import dotenv
from common.errors import T2UError
from common.settings import configure_logging, get_settings
from fastmcp import FastMCP
from models.array import ArrayConfig
from models.scenario import ScenarioConfig, TrajectorySpec
from services.geometry.array_geometry import rayleigh_distance
from services.scenario.service import SimulationService, parse_schemes, report_json
from services.scenario.trajectory import generate_trajectory
from starlette.requests import Request
from starlette.responses import PlainTextResponse

dotenv.load_dotenv()
logger = logging.getLogger("t2u-server")

mcp = FastMCP(get_settings().mcp_server_name)


def error_payload(err: Exception) -> Dict[str, str]:
    return {"error": str(err), "kind": type(err).__name__}


def rayleigh_payload(array: Optional[ArrayConfig] = None) -> Dict[str, float]:
    array = array or ArrayConfig()
    return {
        "rayleigh_distance": rayleigh_distance(array),
        "wavelength": float(array.wavelength),
        "aperture": array.aperture,
    }


def trajectory_payload(spec: TrajectorySpec, dt: float) -> List[Dict[str, Any]]:
    traj = generate_trajectory(spec, dt)
    return [
        {"t": float(t), "x": s.x, "y": s.y, "vx": s.vx, "vy": s.vy, "omega": s.omega, "maneuver": label}
        for t, s, label in zip(traj.times, traj.states, traj.labels)
    ]


def simulate_payload(
    config: Optional[ScenarioConfig],
    schemes: Optional[List[str]] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    plot: bool = False,
) -> Dict[str, Any]:
    service = SimulationService.get_instance()
    cfg = SimulationService.with_overrides(config or ScenarioConfig(), seed=seed, num_trials=trials)

    if schemes:
        report = service.compare(cfg, parse_schemes(schemes), plot=plot)
    else:
        report = service.simulate(cfg, plot=plot)

    return report_json(report)


@mcp.custom_route("/health", methods=["GET"])
async def health_check(request: Request) -> PlainTextResponse:
    return PlainTextResponse("MCP Server is up and running")


@mcp.tool()
async def t2u_rayleigh_distance(array: Optional[ArrayConfig] = None) -> Dict[str, Any]:
    """
    Boundary between the near field and the far field of the array, 2 D^2 / lambda.

    @params
    array[Optional[ArrayConfig]]: Array geometry; the 128-element 30 GHz half-wavelength
    array when omitted.

    @return
    Dict[str, Any]: rayleigh_distance, wavelength and aperture in meters.
    """
    try:
        return rayleigh_payload(array)
    except T2UError as err:
        logger.error(err)
        return error_payload(err)


@mcp.tool()
async def t2u_generate_trajectory(spec: TrajectorySpec, dt: float = 0.75) -> List[Dict[str, Any]] | Dict[str, str]:
    """
    Samples a piecewise straight / arc trajectory.

    @params
    spec[TrajectorySpec]: Initial pose {x, y, heading} and segments
    [{kind: straight|arc, duration, speed, turn_rate}].
    dt[float]: Sampling interval in seconds.

    @return
    List[Dict[str, Any]]: One sample per dt with t, x, y, vx, vy, omega and maneuver.
    """
    try:
        return trajectory_payload(spec, dt)
    except T2UError as err:
        logger.error(err)
        return error_payload(err)


@mcp.tool()
async def t2u_simulate(
    config: Optional[ScenarioConfig] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    plot: bool = False,
) -> Dict[str, Any]:
    """
    Runs the configured scheme of a scenario and writes epochs.csv and summary.json.

    @params
    config[Optional[ScenarioConfig]]: Scenario; the default three-user turning scenario
    when omitted.
    seed[Optional[int]]: Overrides the config seed.
    trials[Optional[int]]: Overrides the number of Monte Carlo trials.
    plot[bool]: Also writes SVG figures.

    @return
    Dict[str, Any]: The metrics report.
    """
    try:
        return await asyncio.to_thread(simulate_payload, config, None, seed, trials, plot)
    except T2UError as err:
        logger.error(err)
        return error_payload(err)


@mcp.tool()
async def t2u_compare(
    schemes: List[str],
    config: Optional[ScenarioConfig] = None,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    plot: bool = False,
) -> Dict[str, Any]:
    """
    Runs several schemes on the same trajectories and random draws.

    @params
    schemes[List[str]]: Any of IMM-PDA, IMM-NN, CV-PDA, CV-NN, GENIE, RANDOM, IMM-PDA-FF.
    config[Optional[ScenarioConfig]]: Scenario; the default turning scenario when omitted.
    seed[Optional[int]]: Overrides the config seed.
    trials[Optional[int]]: Overrides the number of Monte Carlo trials.
    plot[bool]: Also writes SVG figures.

    @return
    Dict[str, Any]: The metrics report, one entry per scheme.
    """
    try:
        return await asyncio.to_thread(simulate_payload, config, schemes, seed, trials, plot)
    except T2UError as err:
        logger.error(err)
        return error_payload(err)


@mcp.resource("file://summary.json")
async def get_summary() -> Dict[str, Any]:
    """
    Summary written by the latest simulation, empty when nothing ran yet.
    """
    return SimulationService.get_instance().last_summary()


if __name__ == "__main__":
    configure_logging()
    settings = get_settings()

    try:
        match settings.mcp_http_transport:
            case "http":
                mcp.run(transport="http", port=settings.mcp_port)
            case "stdio":
                mcp.run(transport="stdio")
    except Exception as err:
        logger.error(f"Fatal error: {err}")
        sys.exit(1)
