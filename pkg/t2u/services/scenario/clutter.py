import logging
import math
from typing import List

import numpy as np
from models.scenario import ClutterPlacement
from models.vehicle import VehicleState
from services.scenario.trajectory import Trajectory

logger = logging.getLogger(__name__)


def _draw_offsets(placement: ClutterPlacement, rng: np.random.Generator) -> tuple[float, float, float]:
    lateral = float(placement.lateral_offsets[rng.integers(len(placement.lateral_offsets))])

    while True:
        longitudinal = float(
            rng.uniform(-placement.longitudinal_range, placement.longitudinal_range)
        )
        if lateral != 0.0 or abs(longitudinal) >= placement.min_longitudinal_gap:
            break

    jitter = float(rng.uniform(-placement.speed_jitter, placement.speed_jitter))
    return lateral, longitudinal, jitter


def _shifted(s: VehicleState, heading: float, lateral: float, longitudinal: float, jitter: float) -> VehicleState:
    cos_h = math.cos(heading)
    sin_h = math.sin(heading)
    speed = s.speed
    factor = max(speed + jitter, 0.0) / speed if speed > 0 else 0.0

    return VehicleState(
        x=s.x + longitudinal * cos_h - lateral * sin_h,
        y=s.y + longitudinal * sin_h + lateral * cos_h,
        vx=s.vx * factor,
        vy=s.vy * factor,
        omega=s.omega,
    )


def spawn_clutter(
    user_traj: Trajectory, count: int, placement: ClutterPlacement, rng: np.random.Generator
) -> List[Trajectory]:
    """
    Non-cooperative vehicles travelling alongside a user.

    Each clutter vehicle keeps a fixed lane (lateral) and headway (longitudinal) offset
    in the user's heading frame and drives at the user's speed plus a constant jitter.
    Offsets move positions only, so every clutter vehicle stays within
    hypot(max lateral, longitudinal range) of its user.

    @params
    user_traj[Trajectory]: Trajectory of the user.
    count[int]: Number of clutter vehicles.
    placement[ClutterPlacement]: Offset ranges and speed jitter.
    rng[Generator]: Random stream for this user and trial.

    @return
    List[Trajectory]: One trajectory per clutter vehicle, sampled like the user's.
    """
    clutter = []

    for _ in range(count):
        lateral, longitudinal, jitter = _draw_offsets(placement, rng)

        heading = 0.0
        states = []
        for s in user_traj:
            # a stopped user keeps its last heading
            if s.speed > 0:
                heading = s.heading
            states.append(_shifted(s, heading, lateral, longitudinal, jitter))

        clutter.append(
            Trajectory(times=user_traj.times, states=tuple(states), labels=user_traj.labels)
        )

    logger.debug(f"Spawned {count} clutter vehicles")

    return clutter
