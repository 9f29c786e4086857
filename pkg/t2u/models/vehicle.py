import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field


class ModelKind(str, Enum):
    CV = "CV"
    CT = "CT"


@dataclass(frozen=True)
class VehicleState:
    """
    Kinematic state [x, y, vx, vy, omega] in the array frame (m, m/s, rad/s).
    """

    x: float
    y: float
    vx: float
    vy: float
    omega: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @property
    def heading(self) -> float:
        return math.atan2(self.vy, self.vx)

    def to_array(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y, self.vx, self.vy, self.omega], dtype=float)

    @classmethod
    def from_array(cls, values) -> "VehicleState":
        x, y, vx, vy, omega = (float(v) for v in values)
        return cls(x=x, y=y, vx=vx, vy=vy, omega=omega)

    @classmethod
    def from_polar(
        cls, r: float, theta: float, speed: float, heading: float, omega: float = 0.0
    ) -> "VehicleState":
        return cls(
            x=r * math.cos(theta),
            y=r * math.sin(theta),
            vx=speed * math.cos(heading),
            vy=speed * math.sin(heading),
            omega=omega,
        )


class ProcessNoiseConfig(BaseModel):
    """Random-acceleration drivers of the process noise (m/s^2, rad/s^2)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sigma_ax: float = Field(default=2.0, ge=0)
    sigma_ay: float = Field(default=2.0, ge=0)
    sigma_aw: float = Field(default=3.0, ge=0)
    # omega variance injected by the CV hypothesis, which pins omega to 0
    cv_omega_variance: float = Field(default=1e-6, ge=0)
