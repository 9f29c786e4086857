import math

import numpy as np
import pytest
from common.errors import TrajectoryFormatError
from models.scenario import InitialPose, Segment, TrajectorySpec
from services.scenario.trajectory import generate_trajectory, load_trajectory, resample, save_trajectory


def _spec() -> TrajectorySpec:
    return TrajectorySpec(
        initial=InitialPose(x=-50.0, y=20.0, heading=0.0),
        segments=[
            Segment(kind="straight", duration=3.0, speed=10.0),
            Segment(kind="arc", duration=3.0, speed=10.0, turn_rate=0.15),
        ],
    )


def test_generated_samples_sit_on_the_grid():
    traj = generate_trajectory(_spec(), 0.75)

    assert len(traj) == 9
    np.testing.assert_allclose(traj.times, np.arange(9) * 0.75)
    assert traj.duration == pytest.approx(6.0)


def test_straight_segment_moves_along_heading():
    traj = generate_trajectory(_spec(), 0.75)

    assert traj[2].x == pytest.approx(-50.0 + 15.0)
    assert traj[2].y == pytest.approx(20.0)
    assert traj.labels[:4] == ("straight",) * 4


def test_boundary_sample_belongs_to_the_next_segment():
    traj = generate_trajectory(_spec(), 0.75)

    # t = 3.0 is the start of the arc
    assert traj.labels[4] == "arc"
    assert traj[4].omega == 0.15
    assert traj[4].x == pytest.approx(-20.0)


def test_arc_keeps_speed_and_turns_heading():
    traj = generate_trajectory(_spec(), 0.75)

    assert traj[-1].speed == pytest.approx(10.0)
    assert traj[-1].heading == pytest.approx(0.15 * 3.0)


def test_save_and_load_preserve_samples_exactly(tmp_path):
    traj = generate_trajectory(_spec(), 0.75)
    path = save_trajectory(traj, tmp_path / "user.csv")

    assert path.read_bytes().startswith(b"t,x,y,vx,vy,omega\n")
    assert b"\r\n" not in path.read_bytes()

    loaded = load_trajectory(path)
    np.testing.assert_array_equal(loaded.times, traj.times)
    np.testing.assert_array_equal(loaded.as_array(), traj.as_array())
    assert loaded.labels == traj.labels


def test_load_rebuilds_velocity_and_turn_rate(tmp_path):
    path = tmp_path / "positions.csv"
    rows = ["t,x,y"] + [f"{t},{2.0 * t},{5.0}" for t in range(5)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    traj = load_trajectory(path)

    np.testing.assert_allclose([s.vx for s in traj], 2.0)
    np.testing.assert_allclose([s.vy for s in traj], 0.0)
    np.testing.assert_allclose([s.omega for s in traj], 0.0, atol=1e-12)
    assert set(traj.labels) == {"straight"}


def test_load_rebuilds_turn_rate_of_a_circle(tmp_path):
    path = tmp_path / "circle.csv"
    rows = ["t,x,y,vx,vy"]
    for k in range(20):
        t = 0.1 * k
        rows.append(f"{t},{math.cos(0.5 * t)},{math.sin(0.5 * t)},{-0.5 * math.sin(0.5 * t)},{0.5 * math.cos(0.5 * t)}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    traj = load_trajectory(path)

    np.testing.assert_allclose([s.omega for s in traj], 0.5, rtol=1e-6)
    assert set(traj.labels) == {"arc"}


@pytest.mark.parametrize(
    "content, fragment",
    [
        ("", "empty"),
        ("t,x,z\n0,1,2\n", ":1:"),
        ("t,x,y\n0,1,2\n1,2\n", ":3:"),
        ("t,x,y\n0,1,2\n1,abc,2\n", ":3:"),
        ("t,x,y\n0,1,2\n1,nan,2\n", ":3:"),
        ("t,x,y\n0,1,2\n0,2,2\n", ":3:"),
        ("t,x,y\n0,1,2\n", "two samples"),
        ("t,x,y\n", "no samples"),
    ],
)
def test_malformed_files_report_location(tmp_path, content, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")

    with pytest.raises(TrajectoryFormatError) as err:
        load_trajectory(path)

    assert fragment in str(err.value)
    assert str(path) in str(err.value)


def test_resample_returns_grid_trajectory_unchanged():
    traj = generate_trajectory(_spec(), 0.75)
    out = resample(traj, 0.75, 5)

    assert out.states == traj.states[:5]


def test_resample_interpolates_off_grid_samples():
    traj = generate_trajectory(_spec(), 1.5)
    out = resample(traj, 0.75, 4)

    assert len(out) == 4
    assert out[1].x == pytest.approx(-50.0 + 7.5)


def test_resample_rejects_short_trajectories():
    traj = generate_trajectory(_spec(), 0.75)
    with pytest.raises(TrajectoryFormatError):
        resample(traj, 0.75, 20)
