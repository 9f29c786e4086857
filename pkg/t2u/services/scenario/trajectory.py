import csv
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from common.errors import TrajectoryFormatError
from models.scenario import TrajectorySpec
from models.vehicle import ModelKind, VehicleState
from numpy.typing import NDArray
from services.motion.motion_models import propagate

logger = logging.getLogger(__name__)

FULL_HEADER = ["t", "x", "y", "vx", "vy", "omega"]
KINEMATIC_HEADER = FULL_HEADER[:5]
POSITION_HEADER = FULL_HEADER[:3]

# Samples turning slower than this (rad/s) are labelled straight.
ARC_RATE_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class Trajectory(Sequence):
    """
    Time-stamped ground-truth states of one vehicle.

    Behaves as a sequence of VehicleState; ``labels`` names the maneuver ("straight" or
    "arc") each sample belongs to.
    """

    times: NDArray[np.float64]
    states: Tuple[VehicleState, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        if not (len(self.times) == len(self.states) == len(self.labels)):
            raise TrajectoryFormatError("Trajectory times, states and labels differ in length")

    def __getitem__(self, index):
        return self.states[index]

    def __len__(self) -> int:
        return len(self.states)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self.times) else 0.0

    def as_array(self) -> NDArray[np.float64]:
        return np.array([s.to_array() for s in self.states])


def _segment_start(state: VehicleState, speed: float, heading: float, turn_rate: float) -> VehicleState:
    return VehicleState(
        x=state.x,
        y=state.y,
        vx=speed * math.cos(heading),
        vy=speed * math.sin(heading),
        omega=turn_rate,
    )


def generate_trajectory(spec: TrajectorySpec, dt: float) -> Trajectory:
    """
    Samples a piecewise trajectory exactly at multiples of dt.

    Every sample is propagated from the start of its own segment, so no error builds
    up across samples. A sample falling exactly on a segment boundary belongs to the
    later segment.

    @params
    spec[TrajectorySpec]: Initial pose and ordered segments.
    dt[float]: Sampling interval in seconds.

    @return
    Trajectory: Samples at t = 0, dt, 2 dt, ... up to the total duration.
    """
    starts: List[Tuple[float, VehicleState]] = []
    state = VehicleState(x=spec.initial.x, y=spec.initial.y, vx=0.0, vy=0.0)
    heading = spec.initial.heading
    t0 = 0.0

    for segment in spec.segments:
        turn_rate = segment.turn_rate if segment.kind == "arc" else 0.0
        start = _segment_start(state, segment.speed, heading, turn_rate)
        starts.append((t0, start))

        model = ModelKind.CT if segment.kind == "arc" else ModelKind.CV
        state = propagate(start, model, segment.duration)
        heading += turn_rate * segment.duration
        t0 += segment.duration

    total = t0
    count = int(math.floor(total / dt + 1e-9)) + 1
    times = np.arange(count) * dt

    states = []
    labels = []
    index = 0

    for t in times:
        while index + 1 < len(starts) and t >= starts[index + 1][0] - 1e-9:
            index += 1

        segment = spec.segments[index]
        seg_t0, seg_start = starts[index]
        model = ModelKind.CT if segment.kind == "arc" else ModelKind.CV
        sample = propagate(seg_start, model, max(float(t) - seg_t0, 0.0))

        # CV resets omega, keep the segment's turn rate on the sample
        states.append(
            VehicleState(x=sample.x, y=sample.y, vx=sample.vx, vy=sample.vy, omega=seg_start.omega)
        )
        labels.append(segment.kind)

    logger.debug(f"Generated {count} samples over {total:.2f} s")

    return Trajectory(times=times, states=tuple(states), labels=tuple(labels))


def _label(omega: float) -> str:
    return "arc" if abs(omega) > ARC_RATE_THRESHOLD else "straight"


def _parse_rows(path: Path) -> Tuple[List[str], List[Tuple[int, List[float]]]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)

        if header is None:
            raise TrajectoryFormatError(f"{path}: file is empty")

        header = [column.strip() for column in header]
        if header not in (FULL_HEADER, KINEMATIC_HEADER, POSITION_HEADER):
            raise TrajectoryFormatError(
                f"{path}:1: expected header t,x,y[,vx,vy[,omega]], got {','.join(header)}"
            )

        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise TrajectoryFormatError(
                    f"{path}:{line}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError as err:
                raise TrajectoryFormatError(f"{path}:{line}: {err}") from err
            if not all(math.isfinite(v) for v in values):
                raise TrajectoryFormatError(f"{path}:{line}: non-finite value")
            rows.append((line, values))

    return header, rows


def load_trajectory(path: Union[str, Path]) -> Trajectory:
    """
    Reads a trajectory CSV with header t,x,y,vx,vy[,omega] or t,x,y.

    Missing velocities are rebuilt by central differences of the positions; a missing
    omega is rebuilt by differencing the unwrapped heading.

    @params
    path[str | Path]: CSV file.

    @return
    Trajectory: Parsed samples.
    """
    path = Path(path)
    header, rows = _parse_rows(path)

    if not rows:
        raise TrajectoryFormatError(f"{path}: trajectory has no samples")

    for (_, previous), (line, current) in zip(rows, rows[1:]):
        if not current[0] > previous[0]:
            raise TrajectoryFormatError(f"{path}:{line}: timestamps must be strictly increasing")

    data = np.array([values for _, values in rows])
    t = data[:, 0]

    if len(header) < 6 and len(rows) < 2:
        raise TrajectoryFormatError(f"{path}: at least two samples are needed to rebuild missing columns")

    if len(header) == 3:
        vx = np.gradient(data[:, 1], t)
        vy = np.gradient(data[:, 2], t)
    else:
        vx, vy = data[:, 3], data[:, 4]

    if len(header) == 6:
        omega = data[:, 5]
    else:
        omega = np.gradient(np.unwrap(np.arctan2(vy, vx)), t)

    states = tuple(
        VehicleState(x=float(x), y=float(y), vx=float(a), vy=float(b), omega=float(w))
        for x, y, a, b, w in zip(data[:, 1], data[:, 2], vx, vy, omega)
    )

    logger.info(f"Loaded {len(states)} trajectory samples from {path}")

    return Trajectory(times=t, states=states, labels=tuple(_label(s.omega) for s in states))


def save_trajectory(traj: Trajectory, path: Union[str, Path]) -> Path:
    """Writes the full six-column format with repr-exact floats and LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(FULL_HEADER)
        for t, s in zip(traj.times, traj.states):
            writer.writerow([repr(float(v)) for v in (t, s.x, s.y, s.vx, s.vy, s.omega)])

    return path


def resample(traj: Trajectory, dt: float, count: int) -> Trajectory:
    """
    Trajectory on the epoch grid t = t0 + k dt, k < count.

    A trajectory already sampled on that grid is returned unchanged; otherwise every
    state component is linearly interpolated.
    """
    times = traj.times[0] + np.arange(count) * dt

    if times[-1] > traj.times[-1] + 1e-9:
        raise TrajectoryFormatError(
            f"Trajectory covers {traj.duration:.3f} s, {count} epochs of {dt} s requested"
        )

    if len(traj) >= count and np.allclose(traj.times[:count], times, rtol=0.0, atol=1e-9):
        return Trajectory(times=traj.times[:count], states=traj.states[:count], labels=traj.labels[:count])

    values = traj.as_array()
    columns = [np.interp(times, traj.times, values[:, i]) for i in range(5)]
    states = tuple(VehicleState.from_array(row) for row in np.column_stack(columns))

    return Trajectory(times=times, states=states, labels=tuple(_label(s.omega) for s in states))
