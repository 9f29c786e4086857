import math
from dataclasses import dataclass
from typing import Literal, TypeAlias

import numpy as np
from common.errors import GeometryError
from common.units import db_to_linear, dbm_to_watts
from models.array import PolarPoint
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

NoiseScaling: TypeAlias = Literal["fixed", "snr"]


@dataclass(frozen=True)
class EchoTarget:
    """A reflecting vehicle as seen from the array."""

    position: PolarPoint
    speed: float
    heading: float
    reflect_coeff: complex

    def __post_init__(self):
        if self.speed < 0:
            raise GeometryError(f"Echo target speed must be non-negative, got {self.speed}")


@dataclass(frozen=True)
class Measurement:
    """
    One detection in converted coordinates: range (m), radial speed (m/s), angle (rad).

    ``source`` is 0 for the intended user and m >= 1 for the m-th clutter vehicle of the
    beam; it is bookkeeping for scoring only and never read by the trackers.
    """

    range: float
    radial_speed: float
    angle: float
    noise_cov: NDArray[np.float64]
    source: int = -1

    def __post_init__(self):
        if not self.range > 0:
            raise GeometryError(f"Measured range must be positive, got {self.range}")

    @property
    def vector(self) -> NDArray[np.float64]:
        return np.array([self.range, self.radial_speed, self.angle], dtype=float)


class DetectorConfig(BaseModel):
    """
    Matched-filter and CFAR settings for the echo path.

    ``noise_power_dbm`` is the per-real-dimension variance of the matched-filter output
    noise, the convention under which eta = -2 sigma^2 ln(P_fa) holds exactly.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    p_fa: float = Field(default=1e-4, gt=0, le=1)
    noise_power_dbm: float = -57.0
    mf_gain_db: float = 70.0
    tx_power_dbm: float = 30.0
    rcs: float = Field(default=10.0, gt=0)

    @property
    def noise_power(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)

    @property
    def mf_gain(self) -> float:
        return db_to_linear(self.mf_gain_db)

    @property
    def tx_power(self) -> float:
        return dbm_to_watts(self.tx_power_dbm)


class MeasurementNoiseConfig(BaseModel):
    """Per-component measurement noise standard deviations (m, m/s, rad)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sigma_range: float = Field(default=0.02, ge=0)
    sigma_speed: float = Field(default=0.01, ge=0)
    sigma_angle: float = Field(default=0.005, ge=0)
    scaling: NoiseScaling = "fixed"
    max_scale: float = Field(default=1e4, ge=1)
    # lower bound on every variance handed to the tracker (m^2, (m/s)^2, rad^2)
    variance_floor: float = Field(default=1e-12, ge=0)

    @property
    def sigmas(self) -> NDArray[np.float64]:
        return np.array([self.sigma_range, self.sigma_speed, self.sigma_angle])

    @property
    def covariance(self) -> NDArray[np.float64]:
        return np.diag(self.sigmas**2)

    @property
    def tracking_covariance(self) -> NDArray[np.float64]:
        return np.diag(np.maximum(self.sigmas**2, self.variance_floor))


def reflection_coefficient(r: float, wavelength: float, rcs: float) -> complex:
    """
    Round-trip free-space reflection coefficient with |beta|^2 = lambda^2 rcs / ((4 pi)^3 r^4).
    """
    amplitude = math.sqrt(wavelength**2 * rcs / ((4.0 * math.pi) ** 3 * r**4))
    return amplitude * complex(np.exp(-1j * 4.0 * math.pi * r / wavelength))
