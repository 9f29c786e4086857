import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from common.errors import ConfigError
from common.settings import get_settings
from models.scenario import EpochLog, MetricsReport, ScenarioConfig, Scheme, TrajectorySpec
from pydantic import BaseModel, ValidationError
from services.scenario.plots import render_figures
from services.scenario.report import build_report, logs_frame
from services.scenario.simulator import simulate_schemes
from services.scenario.trajectory import Trajectory, generate_trajectory, save_trajectory
from services.storage.store import DiskStorageService, StorageService

logger = logging.getLogger(__name__)

EPOCHS_FILE = "epochs.csv"
SUMMARY_FILE = "summary.json"


def _read_model(path: Union[str, Path], model: type[BaseModel]) -> Any:
    path = Path(path)

    try:
        return model.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(f"Cannot read {path}: {err}") from err
    except ValidationError as err:
        raise ConfigError(f"{path}: {err}") from err


def parse_schemes(names: Union[str, Sequence[str]]) -> List[Scheme]:
    """Schemes from a comma-separated string or a list of names (case-insensitive)."""
    if isinstance(names, str):
        names = [name for name in names.split(",") if name.strip()]

    schemes = []
    for name in names:
        try:
            schemes.append(Scheme(name.strip().upper()))
        except ValueError as err:
            valid = ", ".join(s.value for s in Scheme)
            raise ConfigError(f"Unknown scheme {name!r}, expected one of {valid}") from err

    if not schemes:
        raise ConfigError("At least one scheme is required")

    return schemes


class SimulationService:
    """
    Runs scenarios and persists their outputs (epochs.csv, summary.json, SVG figures)
    through a storage service.
    """

    __storage: StorageService
    __instance: Optional[Any] = None

    def __init__(self, output_dir: Optional[str] = None):
        self.__storage = DiskStorageService(output_dir or get_settings().output_dir)

    @classmethod
    def get_instance(cls):
        """
        Singleton instance writing to the configured output directory.
        """
        if cls.__instance:
            return cls.__instance

        cls.__instance = SimulationService()
        return cls.__instance

    @property
    def storage(self) -> StorageService:
        return self.__storage

    def load_config(self, path: Union[str, Path]) -> Tuple[ScenarioConfig, Path]:
        """
        Reads and validates a scenario JSON file.

        @params
        path[str | Path]: Scenario file.

        @return
        Tuple[ScenarioConfig, Path]: The config and the directory its relative
        trajectory files are resolved against.
        """
        cfg = _read_model(path, ScenarioConfig)
        logger.info(f"Loaded scenario {path}")
        return cfg, Path(path).resolve().parent

    @staticmethod
    def with_overrides(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
        """Copy of the config with the non-None overrides applied and re-validated."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        if not updates:
            return cfg

        try:
            return ScenarioConfig.model_validate({**cfg.model_dump(), **updates})
        except ValidationError as err:
            raise ConfigError(str(err)) from err

    def simulate(
        self,
        cfg: ScenarioConfig,
        workers: Optional[int] = None,
        base_dir: Optional[Path] = None,
        plot: bool = False,
    ) -> MetricsReport:
        """
        Runs the configured scheme and writes its outputs.

        @return
        MetricsReport: Report holding the single scheme.
        """
        return self.compare(cfg, [cfg.scheme], workers, base_dir, plot)

    def compare(
        self,
        cfg: ScenarioConfig,
        schemes: Sequence[Scheme],
        workers: Optional[int] = None,
        base_dir: Optional[Path] = None,
        plot: bool = False,
    ) -> MetricsReport:
        """
        Runs several schemes on shared trajectories and randomness and writes the outputs.

        @params
        cfg[ScenarioConfig]: Scenario.
        schemes[Sequence[Scheme]]: Schemes in report order.
        workers[int]: Worker processes, defaults to the T2U_WORKERS setting.
        base_dir[Path]: Directory for relative trajectory files.
        plot[bool]: Also write the SVG figures.

        @return
        MetricsReport: Per-scheme aggregates.
        """
        workers = workers or get_settings().workers
        logs = simulate_schemes(cfg, schemes, workers, base_dir)
        report = build_report(cfg, logs)

        self.write_outputs(logs, report, plot)

        return report

    def write_outputs(
        self, logs: Dict[Scheme, List[EpochLog]], report: MetricsReport, plot: bool = False
    ) -> Dict[str, str]:
        """
        Persists the epoch table, the summary and optionally the figures.

        @return
        Dict[str, str]: Location of every written file keyed by file name.
        """
        frame = logs_frame([log for scheme_logs in logs.values() for log in scheme_logs])
        files = {
            EPOCHS_FILE: frame.to_csv(index=False, lineterminator="\n"),
            SUMMARY_FILE: report.model_dump_json(indent=2) + "\n",
        }

        if plot:
            files.update(render_figures(report))

        for name, content in files.items():
            self.__storage.write(name, content)
            logger.info(f"Wrote {self.__storage.location(name)}")

        return {name: self.__storage.location(name) for name in files}

    def last_summary(self) -> Dict[str, Any]:
        """
        Summary written by the latest run, or an empty mapping when there is none.
        """
        if not self.__storage.file_exists(SUMMARY_FILE):
            return {}

        return dict(self.__storage.read_json(SUMMARY_FILE))

    def trajgen(
        self, spec_path: Union[str, Path], out_path: Union[str, Path], dt: float = 0.75
    ) -> Trajectory:
        """
        Samples a trajectory spec file and writes it as a trajectory CSV.

        @params
        spec_path[str | Path]: TrajectorySpec JSON.
        out_path[str | Path]: CSV destination.
        dt[float]: Sampling interval in seconds.

        @return
        Trajectory: The generated samples.
        """
        if not dt > 0:
            raise ConfigError(f"Sampling interval must be positive, got {dt}")

        spec = _read_model(spec_path, TrajectorySpec)
        traj = generate_trajectory(spec, dt)
        save_trajectory(traj, out_path)

        logger.info(f"Wrote {len(traj)} samples to {out_path}")

        return traj


def report_json(report: MetricsReport) -> Dict[str, Any]:
    return json.loads(report.model_dump_json())
