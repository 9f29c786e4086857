import numpy as np
import pytest
from models.array import ArrayConfig
from models.scenario import InitialPose, ScenarioConfig, Segment, TrajectorySpec, UserSpec
from models.sensing import MeasurementNoiseConfig


@pytest.fixture
def array_cfg() -> ArrayConfig:
    return ArrayConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def straight_user(x: float, y: float, heading: float, speed: float, duration: float) -> UserSpec:
    return UserSpec(
        trajectory=TrajectorySpec(
            initial=InitialPose(x=x, y=y, heading=heading),
            segments=[Segment(kind="straight", duration=duration, speed=speed)],
        )
    )


def turning_user(x: float, y: float, heading: float, speed: float, turn_rate: float) -> UserSpec:
    return UserSpec(
        trajectory=TrajectorySpec(
            initial=InitialPose(x=x, y=y, heading=heading),
            segments=[
                Segment(kind="straight", duration=3.0, speed=speed),
                Segment(kind="arc", duration=3.0, speed=speed, turn_rate=turn_rate),
            ],
        )
    )


@pytest.fixture
def small_scenario() -> ScenarioConfig:
    """One turning user with two clutter vehicles over 6 s."""
    return ScenarioConfig(
        num_users=1,
        clutter_per_user=2,
        users=[turning_user(-20.0, 25.0, 0.0, 10.0, 0.2)],
        seed=7,
        num_trials=1,
    )


@pytest.fixture
def quiet_noise() -> MeasurementNoiseConfig:
    return MeasurementNoiseConfig(sigma_range=1e-6, sigma_speed=1e-6, sigma_angle=1e-8)
