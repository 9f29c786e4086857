from dataclasses import dataclass

import numpy as np
from common.errors import DimensionMismatchError
from common.units import dbm_to_watts
from models.array import SteeringVector
from pydantic import BaseModel, ConfigDict

NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class BeamPair:
    """Unit-norm transmit (f) and receive (w) beamforming vectors for one user."""

    tx: SteeringVector
    rx: SteeringVector

    def __post_init__(self):
        for name, beam in (("tx", self.tx), ("rx", self.rx)):
            if beam.ndim != 1:
                raise DimensionMismatchError(f"{name} beam must be a vector, got shape {beam.shape}")
            if abs(np.linalg.norm(beam) - 1.0) > NORM_TOLERANCE:
                raise DimensionMismatchError(f"{name} beam is not unit norm")


class RadioParams(BaseModel):
    """Downlink power budget. The same transmit power drives every beam."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    tx_power_dbm: float = 30.0
    comm_noise_dbm: float = -57.0

    @property
    def tx_power(self) -> float:
        return dbm_to_watts(self.tx_power_dbm)

    @property
    def comm_noise(self) -> float:
        return dbm_to_watts(self.comm_noise_dbm)
