from dataclasses import dataclass
from typing import Optional

import numpy as np
from common.errors import ConfigError
from models.sensing import Measurement
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import chi2

# Squared Mahalanobis distance accepted by the validation gate. 13.8 is the 0.999
# quantile of chi-square with 2 degrees of freedom; gate_probability uses 3 (the
# measurement dimension), so the two settings do not coincide.
DEFAULT_GATE_THRESHOLD = 13.8


@dataclass(frozen=True)
class PredictedMeasurement:
    """Predicted measurement z_hat and its residual covariance S."""

    mean: NDArray[np.float64]
    residual_cov: NDArray[np.float64]


@dataclass(frozen=True)
class AssociationResult:
    """
    Outcome of associating one beam's measurements with its user.

    ``probabilities`` is aligned with ``measurements``; ``fused`` is the single
    measurement handed to the filter update.
    """

    probabilities: NDArray[np.float64]
    fused: Measurement
    measurements: tuple[Measurement, ...]

    @property
    def best_source(self) -> int:
        return self.measurements[int(np.argmax(self.probabilities))].source


@dataclass(frozen=True)
class ClutterModel:
    """Spatial Poisson clutter with ``density`` expected returns per unit measurement volume."""

    density: float

    def __post_init__(self):
        if not self.density > 0:
            raise ConfigError(f"Clutter density must be positive, got {self.density}")

    @classmethod
    def from_expected_count(cls, expected: float, volume: float) -> "ClutterModel":
        return cls(density=expected / volume)


class AssociationConfig(BaseModel):
    """
    Validation gate settings. The gate is on by default; switching it off keeps every
    detection in the association.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    gate_enabled: bool = True
    gate_probability: Optional[float] = Field(default=None, gt=0, lt=1)
    gate_threshold: float = Field(default=DEFAULT_GATE_THRESHOLD, gt=0)

    @property
    def threshold(self) -> float:
        if self.gate_probability is not None:
            return float(chi2.ppf(self.gate_probability, df=3))
        return self.gate_threshold
