import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence, Tuple, TypeAlias

import numpy as np
from common.errors import ConfigError
from models.array import ArrayConfig, PolarPoint
from models.radio import BeamPair, RadioParams
from models.vehicle import VehicleState
from numpy.typing import ArrayLike, NDArray
from services.geometry.array_geometry import (
    beam_gain,
    channel_gain,
    far_field_steering_vector,
    steering_vector,
)

logger = logging.getLogger(__name__)

BeamMode: TypeAlias = Literal["near", "far"]
BoundingBox: TypeAlias = Tuple[float, float, float, float]


def beams_toward(p: PolarPoint, cfg: ArrayConfig, mode: BeamMode = "near") -> BeamPair:
    """
    Normalized transmit and receive beams steered at a point.

    @params
    p[PolarPoint]: Steering point.
    cfg[ArrayConfig]: Array geometry.
    mode[BeamMode]: "near" for spherical-wave steering, "far" for the planar-wave
    approximation that only uses the angle.

    @return
    BeamPair: f = a / sqrt(N_t), w = b / sqrt(N_r).
    """
    if mode == "near":
        a = steering_vector(cfg, "tx", p)
        b = steering_vector(cfg, "rx", p)
    elif mode == "far":
        a = far_field_steering_vector(cfg, p.angle, "tx")
        b = far_field_steering_vector(cfg, p.angle, "rx")
    else:
        raise ConfigError(f"Unknown beam mode {mode!r}")

    return BeamPair(tx=a / math.sqrt(cfg.num_tx), rx=b / math.sqrt(cfg.num_rx))


def predictive_beams(pred: VehicleState, cfg: ArrayConfig, mode: BeamMode = "near") -> BeamPair:
    """Beams steered at the predicted position of a user."""
    return beams_toward(PolarPoint.from_cartesian(pred.x, pred.y), cfg, mode)


def receive_snr(truth: PolarPoint, beams: BeamPair, cfg: ArrayConfig, rp: RadioParams) -> float:
    """
    Downlink SNR p |alpha(r) a(r, theta)^H f|^2 / sigma_c^2.

    The channel is evaluated at the true location, the beam comes from wherever it was
    steered.
    """
    alpha = channel_gain(truth.range, float(cfg.wavelength))
    gain = alpha * beam_gain(steering_vector(cfg, "tx", truth), beams.tx)

    return rp.tx_power * abs(gain) ** 2 / rp.comm_noise


def matched_snr(truth: PolarPoint, cfg: ArrayConfig, rp: RadioParams) -> float:
    """Upper bound of receive_snr, reached by a beam steered exactly at the user."""
    alpha = channel_gain(truth.range, float(cfg.wavelength))
    return rp.tx_power * abs(alpha) ** 2 * cfg.num_tx / rp.comm_noise


def achievable_rate(snr: float) -> float:
    return math.log2(1.0 + snr)


def sum_rate(snrs: ArrayLike) -> float:
    snrs = np.asarray(snrs, dtype=float)
    if np.any(snrs < 0):
        raise ConfigError("SNR values must be non-negative")

    return float(np.sum(np.log2(1.0 + snrs)))


@dataclass(frozen=True)
class RateStatistics:
    """Empirical distribution of per-epoch achievable rates (bps/Hz)."""

    rates: NDArray[np.float64]

    @property
    def mean(self) -> float:
        return float(np.mean(self.rates))

    def cdf(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Sorted rates and the step heights k/n, the last being exactly 1."""
        x = np.sort(self.rates)
        n = x.shape[0]
        return x, np.arange(1, n + 1) / n

    def outage(self, threshold: float) -> float:
        """Fraction of epochs strictly below the threshold."""
        return float(np.count_nonzero(self.rates < threshold) / self.rates.shape[0])

    def quantiles(self, n: int = 101) -> NDArray[np.float64]:
        return np.quantile(self.rates, np.linspace(0.0, 1.0, n))


def rate_statistics(rates: ArrayLike) -> RateStatistics:
    rates = np.asarray(rates, dtype=float).ravel()
    if rates.size == 0:
        raise ConfigError("Rate statistics need at least one rate")

    return RateStatistics(rates=rates)


def bounding_box(points: Sequence[VehicleState], margin: float = 0.0) -> BoundingBox:
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    return min(xs) - margin, max(xs) + margin, min(ys) - margin, max(ys) + margin


def random_beams(
    cfg: ArrayConfig, bbox: BoundingBox, rng: np.random.Generator
) -> Tuple[BeamPair, VehicleState]:
    """
    Near-field beams toward a point drawn uniformly from the bounding box.

    Points closer than 1 m to the array are redrawn.

    @params
    cfg[ArrayConfig]: Array geometry.
    bbox[BoundingBox]: (x_min, x_max, y_min, y_max) in meters.
    rng[Generator]: Random stream.

    @return
    Tuple[BeamPair, VehicleState]: The beams and the point they are steered at (zero
    velocity).
    """
    x_min, x_max, y_min, y_max = bbox
    if max(math.hypot(x, y) for x in (x_min, x_max) for y in (y_min, y_max)) < 1.0:
        raise ConfigError(f"Bounding box {bbox} lies within 1 m of the array")

    while True:
        x = float(rng.uniform(x_min, x_max))
        y = float(rng.uniform(y_min, y_max))
        if math.hypot(x, y) >= 1.0:
            break

    point = VehicleState(x=x, y=y, vx=0.0, vy=0.0)
    return beams_toward(PolarPoint.from_cartesian(x, y), cfg, "near"), point
