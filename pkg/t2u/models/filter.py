from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from common.errors import ConfigError
from models.vehicle import ModelKind, ProcessNoiseConfig, VehicleState
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

PROBABILITY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class GaussianBelief:
    mean: VehicleState
    cov: NDArray[np.float64]

    @property
    def vector(self) -> NDArray[np.float64]:
        return self.mean.to_array()


@dataclass(frozen=True)
class MeasurementModel:
    """
    Measurement function h, its Jacobian H and noise covariance Q_m.

    ``angle_index`` names the component whose residual is wrapped into (-pi, pi];
    None disables wrapping.
    """

    fn: Callable[[VehicleState], NDArray[np.float64]]
    jacobian: Callable[[VehicleState], NDArray[np.float64]]
    noise_cov: NDArray[np.float64]
    angle_index: Optional[int] = 2


@dataclass(frozen=True)
class ImmBank:
    """
    Full filter memory of one tracked vehicle: one belief per motion model, the model
    probabilities rho and the row-stochastic switching matrix Pi (Pi[j, i] = P(j -> i)).
    """

    beliefs: Tuple[GaussianBelief, ...]
    model_probs: NDArray[np.float64]
    transition: NDArray[np.float64]
    models: Tuple[ModelKind, ...] = (ModelKind.CV, ModelKind.CT)

    def __post_init__(self):
        n = len(self.models)

        if len(self.beliefs) != n or self.model_probs.shape != (n,):
            raise ConfigError("IMM bank needs exactly one belief and probability per model")
        if self.transition.shape != (n, n):
            raise ConfigError(f"Transition matrix must be {n}x{n}")
        if np.any(self.model_probs < 0) or abs(self.model_probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
            raise ConfigError(f"Model probabilities {self.model_probs} are not a distribution")
        if np.any(self.transition < 0) or np.any(
            np.abs(self.transition.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE
        ):
            raise ConfigError("Transition matrix rows must be probability distributions")

    def prior_mass(self) -> NDArray[np.float64]:
        """Predicted model probabilities sum_j Pi[j, i] rho[j]."""
        return self.transition.T @ self.model_probs


@dataclass(frozen=True)
class ImmPrediction:
    """
    Output of the interaction and prediction stages, kept until the measurement arrives.
    """

    bank: ImmBank
    predicted: Tuple[GaussianBelief, ...]
    prior_mass: NDArray[np.float64]
    combined: GaussianBelief
    active: Tuple[bool, ...]


class ImmConfig(BaseModel):
    """IMM parameters: switching matrix, initial model probabilities and covariance."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    transition: List[List[float]] = [[0.95, 0.05], [0.05, 0.95]]
    initial_probs: List[float] = [0.5, 0.5]
    initial_cov_diag: List[float] = [1.0, 1.0, 1.0, 1.0, 0.1]
    process_noise: ProcessNoiseConfig = Field(default_factory=ProcessNoiseConfig)

    @field_validator("transition")
    @classmethod
    def rows_are_distributions(cls, value: List[List[float]]):
        matrix = np.asarray(value, dtype=float)
        if matrix.shape != (2, 2) or np.any(matrix < 0):
            raise ValueError("transition must be a non-negative 2x2 matrix")
        if np.any(np.abs(matrix.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE):
            raise ValueError("transition rows must sum to 1")
        return value

    @field_validator("initial_probs")
    @classmethod
    def probs_are_distribution(cls, value: List[float]):
        probs = np.asarray(value, dtype=float)
        if probs.shape != (2,) or np.any(probs < 0) or abs(probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError("initial_probs must be a 2-element probability vector")
        return value

    @field_validator("initial_cov_diag")
    @classmethod
    def cov_is_positive(cls, value: List[float]):
        if len(value) != 5 or any(v <= 0 for v in value):
            raise ValueError("initial_cov_diag needs 5 positive entries")
        return value
