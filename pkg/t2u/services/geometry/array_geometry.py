import logging
import math

import numpy as np
from common.errors import DimensionMismatchError
from models.array import ArrayConfig, ArraySide, PolarPoint, SteeringVector
from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)


def element_distance(p: PolarPoint, n: int, d: float) -> float:
    """
    Distance from the point to the n-th element, placed at [n*d, 0].

    @params
    p[PolarPoint]: Point relative to element 0.
    n[int]: Element index.
    d[float]: Element spacing in meters.

    @return
    float: Euclidean distance in meters.
    """
    nd = n * d
    return math.sqrt(max(p.range**2 + nd**2 - 2.0 * p.range * nd * math.cos(p.angle), 0.0))


def _path_differences(num: int, p: PolarPoint, d: float) -> np.ndarray:
    nd = np.arange(num, dtype=float) * d
    r = p.range
    r_n = np.sqrt(np.maximum(r**2 + nd**2 - 2.0 * r * nd * math.cos(p.angle), 0.0))
    # r_n - r rewritten to avoid cancellation at long range
    return (nd**2 - 2.0 * r * nd * math.cos(p.angle)) / (r_n + r)


def steering_vector(cfg: ArrayConfig, side: ArraySide, p: PolarPoint) -> SteeringVector:
    """
    Spherical-wave array response toward a point.

    @params
    cfg[ArrayConfig]: Array geometry.
    side[ArraySide]: "tx" for a(r, theta), "rx" for b(r, theta). Both sides share the
    same element layout.
    p[PolarPoint]: Point relative to element 0.

    @return
    SteeringVector: Unit-modulus complex vector, entry 0 equal to 1.
    """
    delta = _path_differences(cfg.num_elements(side), p, float(cfg.spacing))
    return np.exp(-1j * (2.0 * np.pi / float(cfg.wavelength)) * delta)


def far_field_steering_vector(
    cfg: ArrayConfig, theta: float, side: ArraySide = "tx"
) -> SteeringVector:
    """Planar-wave limit of steering_vector: phase of element n is 2*pi*n*d*cos(theta)/lambda."""
    nd = np.arange(cfg.num_elements(side), dtype=float) * float(cfg.spacing)
    return np.exp(-1j * (2.0 * np.pi / float(cfg.wavelength)) * (-nd * math.cos(theta)))


def channel_gain(r: float, wavelength: float) -> complex:
    """Free-space complex gain sqrt(lambda / (4 pi r)) * exp(-j 2 pi r / lambda)."""
    amplitude = math.sqrt(wavelength / (4.0 * math.pi * r))
    return amplitude * complex(np.exp(-1j * 2.0 * math.pi * r / wavelength))


def rayleigh_distance(cfg: ArrayConfig) -> float:
    return 2.0 * cfg.aperture**2 / float(cfg.wavelength)


def beam_gain(v: ArrayLike, w: ArrayLike) -> complex:
    """
    Beamforming gain v^H w.

    @params
    v[ArrayLike]: Steering vector.
    w[ArrayLike]: Unit-norm beamforming vector of the same length.

    @return
    complex: The inner product v^H w.
    """
    v = np.asarray(v)
    w = np.asarray(w)

    if v.shape != w.shape:
        raise DimensionMismatchError(
            f"Steering vector of length {v.shape} cannot be applied to beam of length {w.shape}"
        )

    return complex(np.vdot(v, w))
