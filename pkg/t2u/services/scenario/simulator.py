import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from common.angles import wrap_angle
from common.errors import ConfigError, NoUsableMeasurementError, SingularCovarianceError
from common.gaussian import floor_variances
from models.array import PolarPoint
from models.association import AssociationResult
from models.filter import ImmBank
from models.scenario import (
    EpochLog,
    InitialPose,
    MetricsReport,
    ScenarioConfig,
    Scheme,
    Segment,
    TrajectorySpec,
    UserSpec,
    default_epoch_count,
)
from models.vehicle import VehicleState
from services.association.pda import (
    associate_nn,
    associate_pda,
    gate_volume,
    predicted_measurement,
)
from services.beamforming.metrics import (
    BoundingBox,
    achievable_rate,
    bounding_box,
    predictive_beams,
    random_beams,
    receive_snr,
)
from services.motion.motion_models import process_noise_cov
from services.scenario.clutter import spawn_clutter
from services.scenario.report import build_report
from services.scenario.trajectory import Trajectory, generate_trajectory, load_trajectory, resample
from services.sensing.frontend import measure_fn, radar_measurement_model, synthesize_measurements
from services.tracking.imm_filter import (
    coast,
    combined_posterior,
    imm_predict,
    imm_update,
    initial_bank,
)

logger = logging.getLogger(__name__)

# Stream purposes, the last entry of every spawn key.
PURPOSE_NOISE = 0
PURPOSE_RANDOM_BEAM = 1
PURPOSE_INIT = 2
PURPOSE_CLUTTER = 3

# Epochs 0 and 1 only feed the two-point initialization.
FIRST_TRACKED_EPOCH = 2

# (x, y, heading, speed, turn rate) of the turning scenario's base users. Each starts
# 50-60 m from the array, passes it at 15-30 m and turns near the closest approach.
DEFAULT_USER_TEMPLATES = (
    (-45.0, 38.0, math.radians(-20.0), 8.0, 0.15),
    (50.0, 30.0, math.radians(195.0), 9.0, -0.15),
    (-40.0, 30.0, math.radians(-10.0), 10.0, 0.15),
)
DEFAULT_ROW_SHIFT = 10.0


def stream(seed: int, trial: int, epoch: int, user: int, purpose: int) -> np.random.Generator:
    """Random stream keyed by where it is used, independent of call order."""
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(trial, epoch, user, purpose))
    )


def default_scenario_users(num_users: int) -> List[UserSpec]:
    """
    Turning scenario: straight 8 s, arc 7 s, straight 8 s per user.

    Users beyond the third reuse the base templates shifted 10 m further from the array
    per extra row.
    """
    users = []

    for k in range(num_users):
        x, y, heading, speed, turn_rate = DEFAULT_USER_TEMPLATES[k % len(DEFAULT_USER_TEMPLATES)]
        shift = DEFAULT_ROW_SHIFT * (k // len(DEFAULT_USER_TEMPLATES))

        spec = TrajectorySpec(
            initial=InitialPose(x=x, y=y + shift, heading=heading),
            segments=[
                Segment(kind="straight", duration=8.0, speed=speed),
                Segment(kind="arc", duration=7.0, speed=speed, turn_rate=turn_rate),
                Segment(kind="straight", duration=8.0, speed=speed),
            ],
        )
        users.append(UserSpec(trajectory=spec))

    return users


def user_trajectories(
    cfg: ScenarioConfig, base_dir: Optional[Union[str, Path]] = None
) -> List[Trajectory]:
    """
    Ground-truth user trajectories on the common epoch grid.

    @params
    cfg[ScenarioConfig]: Scenario.
    base_dir[str | Path]: Directory relative trajectory files are resolved against.

    @return
    List[Trajectory]: One trajectory per user, all with the same number of epochs.
    """
    dt = cfg.epoch_interval
    users = cfg.users if cfg.users is not None else default_scenario_users(cfg.num_users)
    raw = []

    for user in users:
        if user.trajectory is not None:
            raw.append(generate_trajectory(user.trajectory, dt))
            continue

        path = Path(user.trajectory_file)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        raw.append(load_trajectory(path))

    duration = min(traj.duration for traj in raw)
    if cfg.duration is not None:
        if cfg.duration > duration + 1e-9:
            raise ConfigError(f"duration {cfg.duration} s exceeds the shortest trajectory ({duration:.3f} s)")
        duration = cfg.duration

    count = default_epoch_count(duration, dt)
    if count <= FIRST_TRACKED_EPOCH:
        raise ConfigError(
            f"Scenario needs more than {FIRST_TRACKED_EPOCH} epochs, {duration:.3f} s gives {count}"
        )

    return [resample(traj, dt, count) for traj in raw]


@dataclass(frozen=True)
class TrialScene:
    users: Tuple[Trajectory, ...]
    clutter: Tuple[Tuple[Trajectory, ...], ...]
    bbox: BoundingBox


def build_scene(cfg: ScenarioConfig, users: Sequence[Trajectory], trial: int) -> TrialScene:
    """Users plus the clutter drawn for one trial; shared by every scheme."""
    clutter = tuple(
        tuple(
            spawn_clutter(
                traj,
                cfg.clutter_per_user,
                cfg.clutter,
                stream(cfg.seed, trial, 0, k, PURPOSE_CLUTTER),
            )
        )
        for k, traj in enumerate(users)
    )
    bbox = bounding_box([s for traj in users for s in traj])

    return TrialScene(users=tuple(users), clutter=clutter, bbox=bbox)


def _init_measurement(cfg: ScenarioConfig, truth: VehicleState, trial: int, epoch: int, user: int):
    rng = stream(cfg.seed, trial, epoch, user, PURPOSE_INIT)
    return measure_fn(truth) + cfg.noise.sigmas * rng.standard_normal(3)


def _acquire(
    cfg: ScenarioConfig, scheme: Scheme, traj: Trajectory, trial: int, epoch: int, user: int
) -> ImmBank:
    """Two-point initialization from the initial-access measurements of epochs epoch-1 and epoch."""
    z0 = _init_measurement(cfg, traj[epoch - 1], trial, epoch - 1, user)
    z1 = _init_measurement(cfg, traj[epoch], trial, epoch, user)
    return initial_bank(z0, z1, cfg.epoch_interval, cfg.imm, single_model=scheme.single_model)


def _errors(pred: VehicleState, truth: VehicleState) -> Tuple[float, float]:
    p = PolarPoint.from_cartesian(pred.x, pred.y)
    t = PolarPoint.from_cartesian(truth.x, truth.y)
    return p.range - t.range, wrap_angle(p.angle - t.angle)


def run_trial(cfg: ScenarioConfig, scheme: Scheme, scene: TrialScene, trial: int) -> List[EpochLog]:
    """
    Runs one Monte Carlo trial of a scheme over every tracked epoch.

    Per epoch and user: predict, steer beams, sense the user and its clutter, associate,
    update and score the downlink. An epoch without a usable measurement falls back to
    a prediction-only update. After ``beam_failure_epochs`` consecutive failed epochs
    (prediction-only, or a rate below the outage threshold) the user is re-acquired
    through initial access, the same two-point initialization as epochs 0 and 1.

    @params
    cfg[ScenarioConfig]: Scenario.
    scheme[Scheme]: Tracking and beamforming scheme.
    scene[TrialScene]: Trajectories of the trial.
    trial[int]: Trial index, part of every random stream key.

    @return
    List[EpochLog]: Records ordered by epoch then user.
    """
    dt = cfg.epoch_interval
    mm = replace(radar_measurement_model(cfg.noise), noise_cov=cfg.noise.tracking_covariance)
    num_epochs = len(scene.users[0])

    banks: List[Optional[ImmBank]] = [None] * len(scene.users)
    failures = [0] * len(scene.users)
    Qs = []
    if scheme.tracked:
        for k, traj in enumerate(scene.users):
            banks[k] = _acquire(cfg, scheme, traj, trial, 1, k)

        Qs = [process_noise_cov(cfg.imm.process_noise, dt, model) for model in banks[0].models]

    logs = []

    for epoch in range(FIRST_TRACKED_EPOCH, num_epochs):
        for k, traj in enumerate(scene.users):
            truth = traj[epoch]
            truth_polar = PolarPoint.from_cartesian(truth.x, truth.y)

            measurement_count = 0
            clutter_count = 0
            beta: List[float] = []
            best_source = None
            prediction_only = False
            volume = None
            rho = (None, None)

            if scheme == Scheme.GENIE:
                beams = predictive_beams(truth, cfg.array, "near")
                pred = est = truth
            elif scheme == Scheme.RANDOM:
                rng = stream(cfg.seed, trial, epoch, k, PURPOSE_RANDOM_BEAM)
                beams, pred = random_beams(cfg.array, scene.bbox, rng)
                est = pred
            else:
                prediction = imm_predict(banks[k], dt, Qs)
                pred = prediction.combined.mean
                beams = predictive_beams(pred, cfg.array, scheme.beam_mode)

                candidates = [truth] + [c[epoch] for c in scene.clutter[k]]
                measurements = synthesize_measurements(
                    candidates,
                    beams,
                    cfg.array,
                    cfg.detector,
                    cfg.noise,
                    stream(cfg.seed, trial, epoch, k, PURPOSE_NOISE),
                )
                measurement_count = len(measurements)
                clutter_count = sum(1 for z in measurements if z.source != 0)

                try:
                    pm = predicted_measurement(prediction.combined, mm)
                    volume = gate_volume(pm, cfg.association.threshold)

                    result: AssociationResult
                    if scheme.association == "nn":
                        result = associate_nn(measurements, pm, cfg.noise.sigmas, cfg.association)
                    else:
                        result = associate_pda(measurements, pm, cfg.association)

                    noise_cov = floor_variances(result.fused.noise_cov, cfg.noise.variance_floor)
                    banks[k] = imm_update(prediction, result.fused.vector, replace(mm, noise_cov=noise_cov))
                    beta = [float(b) for b in result.probabilities]
                    best_source = result.best_source
                    logger.debug(
                        f"trial {trial} epoch {epoch} user {k}: Q={measurement_count}, beta={beta}"
                    )
                except (NoUsableMeasurementError, SingularCovarianceError) as err:
                    logger.warning(
                        f"trial {trial} epoch {epoch} user {k}: prediction-only update ({err})"
                    )
                    banks[k] = coast(prediction)
                    prediction_only = True

                est = combined_posterior(banks[k]).mean
                rho = (float(banks[k].model_probs[0]), float(banks[k].model_probs[1]))

            snr = receive_snr(truth_polar, beams, cfg.array, cfg.radio)
            rate = achievable_rate(snr)
            distance_error, angle_error = _errors(pred, truth)

            reacquired = False
            if scheme.tracked:
                failed = prediction_only or rate < cfg.outage_threshold
                failures[k] = failures[k] + 1 if failed else 0

                if cfg.beam_failure_epochs and failures[k] >= cfg.beam_failure_epochs:
                    logger.info(
                        f"trial {trial} epoch {epoch} user {k}: beam failure after {failures[k]} epochs, re-acquiring"
                    )
                    banks[k] = _acquire(cfg, scheme, traj, trial, epoch, k)
                    failures[k] = 0
                    reacquired = True

            logs.append(
                EpochLog(
                    scheme=scheme,
                    trial=trial,
                    epoch=epoch,
                    time=float(traj.times[epoch]),
                    user=k,
                    maneuver=traj.labels[epoch],
                    true_x=truth.x,
                    true_y=truth.y,
                    true_vx=truth.vx,
                    true_vy=truth.vy,
                    true_omega=truth.omega,
                    pred_x=pred.x,
                    pred_y=pred.y,
                    est_x=est.x,
                    est_y=est.y,
                    distance_error=distance_error,
                    angle_error=angle_error,
                    measurement_count=measurement_count,
                    clutter_count=clutter_count,
                    beta=beta,
                    best_source=best_source,
                    prediction_only=prediction_only,
                    reacquired=reacquired,
                    gate_volume=volume,
                    rho_cv=rho[0],
                    rho_ct=rho[1],
                    snr=snr,
                    rate=rate,
                )
            )

    return logs


def _simulate_trial(args) -> Tuple[int, Dict[Scheme, List[EpochLog]]]:
    cfg, schemes, users, trial = args
    scene = build_scene(cfg, users, trial)
    logs = {scheme: run_trial(cfg, scheme, scene, trial) for scheme in schemes}

    logger.info(f"Trial {trial} finished for {', '.join(s.value for s in schemes)}")

    return trial, logs


def simulate_schemes(
    cfg: ScenarioConfig,
    schemes: Sequence[Scheme],
    workers: int = 1,
    base_dir: Optional[Union[str, Path]] = None,
) -> Dict[Scheme, List[EpochLog]]:
    """
    Runs every trial of every scheme on shared trajectories and random streams.

    @params
    cfg[ScenarioConfig]: Scenario; its ``scheme`` field is ignored.
    schemes[Sequence[Scheme]]: Schemes to run, in report order.
    workers[int]: Worker processes; 1 runs in-process.
    base_dir[str | Path]: Directory for relative trajectory files.

    @return
    Dict[Scheme, List[EpochLog]]: Logs per scheme ordered by trial, epoch and user.
    """
    if not schemes:
        raise ConfigError("At least one scheme is required")

    schemes = list(dict.fromkeys(schemes))
    users = user_trajectories(cfg, base_dir)
    jobs = [(cfg, schemes, users, trial) for trial in range(cfg.num_trials)]

    logger.info(
        f"Simulating {cfg.num_trials} trial(s) of {len(users)} user(s), {len(users[0])} epochs, "
        f"schemes {', '.join(s.value for s in schemes)}"
    )

    if workers > 1 and cfg.num_trials > 1:
        results = []
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_simulate_trial, job) for job in jobs]
            for future in as_completed(futures):
                results.append(future.result())
    else:
        results = [_simulate_trial(job) for job in jobs]

    results.sort(key=lambda item: item[0])

    return {scheme: [log for _, logs in results for log in logs[scheme]] for scheme in schemes}


def run_scenario(
    cfg: ScenarioConfig, workers: int = 1, base_dir: Optional[Union[str, Path]] = None
) -> List[EpochLog]:
    """All trials of the configured scheme."""
    return simulate_schemes(cfg, [cfg.scheme], workers, base_dir)[cfg.scheme]


def compare_schemes(
    cfg: ScenarioConfig,
    schemes: Sequence[Scheme],
    workers: int = 1,
    base_dir: Optional[Union[str, Path]] = None,
) -> MetricsReport:
    logs = simulate_schemes(cfg, schemes, workers, base_dir)
    return build_report(cfg, logs)
