import math
from dataclasses import dataclass
from typing import Any, Literal, Optional, TypeAlias

import numpy as np
from common.errors import GeometryError
from common.units import SPEED_OF_LIGHT
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

ArraySide: TypeAlias = Literal["tx", "rx"]
SteeringVector: TypeAlias = NDArray[np.complex128]


class ArrayConfig(BaseModel):
    """
    Uniform linear array geometry shared by the transmit and receive sides.

    Element n sits at [n*spacing, 0]. When ``wavelength`` is omitted it is derived from
    ``carrier_frequency``; when ``spacing`` is omitted it defaults to half a wavelength.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_tx: int = Field(default=128, ge=1)
    num_rx: int = Field(default=128, ge=1)
    carrier_frequency: float = Field(default=30e9, gt=0)
    wavelength: Optional[float] = Field(default=None, gt=0)
    spacing: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def derive_wavelength_and_spacing(cls, data: Any):
        if not isinstance(data, dict):
            return data

        data = dict(data)
        if data.get("wavelength") is None:
            data["wavelength"] = SPEED_OF_LIGHT / data.get("carrier_frequency", 30e9)
        if data.get("spacing") is None:
            data["spacing"] = data["wavelength"] / 2.0

        return data

    @property
    def aperture(self) -> float:
        return (self.num_tx - 1) * float(self.spacing)

    def num_elements(self, side: ArraySide) -> int:
        return self.num_tx if side == "tx" else self.num_rx


@dataclass(frozen=True)
class PolarPoint:
    """Range and angle of a point relative to element 0 of the array."""

    range: float
    angle: float

    def __post_init__(self):
        if not self.range > 0:
            raise GeometryError(f"Polar range must be positive, got {self.range}")

    @classmethod
    def from_cartesian(cls, x: float, y: float) -> "PolarPoint":
        r = math.hypot(x, y)
        if r == 0.0:
            raise GeometryError("Cannot express the array origin in polar coordinates")

        return cls(range=r, angle=math.atan2(y, x))

    def to_cartesian(self) -> tuple[float, float]:
        return self.range * math.cos(self.angle), self.range * math.sin(self.angle)
