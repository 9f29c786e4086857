import math

import numpy as np
import pytest
from conftest import straight_user, turning_user
from models.scenario import ClutterPlacement
from services.scenario.clutter import spawn_clutter
from services.scenario.trajectory import generate_trajectory


def _offsets(user, other):
    """Longitudinal and lateral offset of ``other`` in the user's heading frame."""
    dx, dy = other.x - user.x, other.y - user.y
    h = user.heading
    return dx * math.cos(h) + dy * math.sin(h), -dx * math.sin(h) + dy * math.cos(h)


def test_clutter_stays_close_to_its_user(rng):
    placement = ClutterPlacement()
    user = generate_trajectory(turning_user(-20.0, 25.0, 0.0, 10.0, 0.2).trajectory, 0.75)
    bound = math.hypot(3.5, 10.0)

    clutter = spawn_clutter(user, 10, placement, rng)

    assert len(clutter) == 10
    for vehicle in clutter:
        np.testing.assert_array_equal(vehicle.times, user.times)
        for u, c in zip(user, vehicle):
            assert math.hypot(c.x - u.x, c.y - u.y) <= bound + 1e-9


def test_clutter_keeps_lane_and_headway(rng):
    placement = ClutterPlacement()
    user = generate_trajectory(straight_user(-30.0, 20.0, 0.0, 8.0, 6.0).trajectory, 0.75)

    for vehicle in spawn_clutter(user, 20, placement, rng):
        offsets = [_offsets(u, c) for u, c in zip(user, vehicle)]
        longitudinal, lateral = offsets[0]

        assert min(abs(lateral - lane) for lane in placement.lateral_offsets) < 1e-9
        if abs(lateral) < 1e-9:
            assert abs(longitudinal) >= placement.min_longitudinal_gap
        for lon, lat in offsets:
            assert lon == pytest.approx(longitudinal, abs=1e-9)
            assert lat == pytest.approx(lateral, abs=1e-9)


def test_clutter_speed_is_user_speed_plus_constant_jitter(rng):
    placement = ClutterPlacement(speed_jitter=1.0)
    user = generate_trajectory(straight_user(-30.0, 20.0, 0.0, 8.0, 6.0).trajectory, 0.75)

    for vehicle in spawn_clutter(user, 5, placement, rng):
        deltas = [c.speed - u.speed for u, c in zip(user, vehicle)]
        assert max(deltas) - min(deltas) < 1e-9
        assert abs(deltas[0]) <= 1.0


def test_no_clutter_requested(rng):
    user = generate_trajectory(straight_user(-30.0, 20.0, 0.0, 8.0, 3.0).trajectory, 0.75)
    assert spawn_clutter(user, 0, ClutterPlacement(), rng) == []


def test_placement_rejects_gap_beyond_range():
    with pytest.raises(ValueError):
        ClutterPlacement(longitudinal_range=4.0, min_longitudinal_gap=5.0)
