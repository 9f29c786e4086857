import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from common.angles import wrap_angle
from common.errors import GeometryError
from common.units import SPEED_OF_LIGHT
from models.array import ArrayConfig, PolarPoint
from models.filter import MeasurementModel
from models.radio import BeamPair
from models.sensing import (
    DetectorConfig,
    EchoTarget,
    Measurement,
    MeasurementNoiseConfig,
    reflection_coefficient,
)
from models.vehicle import VehicleState
from numpy.typing import NDArray
from services.geometry.array_geometry import beam_gain, steering_vector

logger = logging.getLogger(__name__)


def measure_fn(s: VehicleState) -> NDArray[np.float64]:
    """
    Noise-free measurement of a state: range, radial speed and angle.

    @params
    s[VehicleState]: State in the array frame.

    @return
    NDArray: [r, v cos(theta - h), theta].
    """
    r = math.hypot(s.x, s.y)
    if r == 0.0:
        raise GeometryError("Cannot measure a vehicle located at the array origin")

    # v cos(theta - h) expanded, no heading needed for a stopped vehicle
    radial_speed = (s.x * s.vx + s.y * s.vy) / r

    return np.array([r, radial_speed, math.atan2(s.y, s.x)])


def measurement_jacobian(s: VehicleState) -> NDArray[np.float64]:
    """
    Partial derivatives of measure_fn with respect to [x, y, vx, vy, omega].

    The radial-speed row is zero for a stopped vehicle; the omega column is always zero.
    """
    r2 = s.x**2 + s.y**2
    if r2 == 0.0:
        raise GeometryError("Measurement Jacobian undefined at the array origin")

    r = math.sqrt(r2)
    H = np.zeros((3, 5))

    H[0, 0] = s.x / r
    H[0, 1] = s.y / r

    if s.vx != 0.0 or s.vy != 0.0:
        # cross term (x vy - y vx) / r^3
        cross = (s.x * s.vy - s.y * s.vx) / (r2 * r)
        H[1, 0] = -s.y * cross
        H[1, 1] = s.x * cross
        H[1, 2] = s.x / r
        H[1, 3] = s.y / r

    H[2, 0] = -s.y / r2
    H[2, 1] = s.x / r2

    return H


def radar_measurement_model(noise: MeasurementNoiseConfig) -> MeasurementModel:
    return MeasurementModel(
        fn=measure_fn,
        jacobian=measurement_jacobian,
        noise_cov=noise.covariance,
        angle_index=2,
    )


def range_to_delay(r: float) -> float:
    return 2.0 * r / SPEED_OF_LIGHT


def delay_to_range(tau: float) -> float:
    return tau * SPEED_OF_LIGHT / 2.0


def radial_speed_to_doppler(v_r: float, wavelength: float) -> float:
    return 2.0 * v_r / wavelength


def doppler_to_radial_speed(mu: float, wavelength: float) -> float:
    return mu * wavelength / 2.0


def echo_target(s: VehicleState, cfg: ArrayConfig, rcs: float) -> EchoTarget:
    """Describes a vehicle state as a reflector seen from the array."""
    position = PolarPoint.from_cartesian(s.x, s.y)

    return EchoTarget(
        position=position,
        speed=s.speed,
        heading=s.heading,
        reflect_coeff=reflection_coefficient(position.range, float(cfg.wavelength), rcs),
    )


def beam_gains(t: EchoTarget, beams: BeamPair, cfg: ArrayConfig) -> tuple[complex, complex]:
    """Transmit gain a^H f and receive gain w^H b toward the target."""
    kappa_t = beam_gain(steering_vector(cfg, "tx", t.position), beams.tx)
    kappa_r = beam_gain(steering_vector(cfg, "rx", t.position), beams.rx).conjugate()
    return kappa_t, kappa_r


def matched_filter_peak(
    t: EchoTarget,
    beams: BeamPair,
    cfg: ArrayConfig,
    det: DetectorConfig,
    rng: Optional[np.random.Generator] = None,
) -> complex:
    """
    Peak of the matched-filter output for one reflector.

    @params
    t[EchoTarget]: Reflector.
    beams[BeamPair]: Transmit and receive beams.
    cfg[ArrayConfig]: Array geometry.
    det[DetectorConfig]: Power, gain and noise level.
    rng[Generator]: Source of the complex noise; None gives the noise-free peak.

    @return
    complex: sqrt(p G) beta kappa_T kappa_R + z_r.
    """
    kappa_t, kappa_r = beam_gains(t, beams, cfg)
    draws = None if rng is None else rng.standard_normal(2)

    return _peak(t.reflect_coeff, kappa_t, kappa_r, det, draws)


def _peak(
    reflect_coeff: complex,
    kappa_t: complex,
    kappa_r: complex,
    det: DetectorConfig,
    draws: Optional[NDArray[np.float64]] = None,
) -> complex:
    # draws: real and imaginary standard-normal noise pair
    peak = math.sqrt(det.tx_power * det.mf_gain) * reflect_coeff * kappa_t * kappa_r
    if draws is None:
        return complex(peak)

    return complex(peak + math.sqrt(det.noise_power) * complex(draws[0], draws[1]))


def cfar_threshold(det: DetectorConfig) -> float:
    """
    Power threshold eta = -2 sigma_r^2 ln(P_fa).

    With sigma_r^2 the noise variance per real dimension, |z_r|^2 is exponential with
    mean 2 sigma_r^2 and exceeds eta with probability exactly P_fa.
    """
    return -2.0 * det.noise_power * math.log(det.p_fa)


def noise_scale(
    kappa_t: complex, kappa_r: complex, cfg: ArrayConfig, noise: MeasurementNoiseConfig
) -> float:
    """Standard-deviation multiplier applied to the configured measurement noise."""
    if noise.scaling == "fixed":
        return 1.0

    gain = abs(kappa_t * kappa_r) ** 2
    reference = cfg.num_tx * cfg.num_rx
    if gain == 0.0:
        return math.sqrt(noise.max_scale)

    return math.sqrt(min(max(reference / gain, 1.0), noise.max_scale))


def synthesize_measurements(
    states: Sequence[VehicleState],
    beams: BeamPair,
    cfg: ArrayConfig,
    det: DetectorConfig,
    noise: MeasurementNoiseConfig,
    rng: np.random.Generator,
    sources: Optional[Sequence[int]] = None,
) -> List[Measurement]:
    """
    Detection outcomes and noisy measurements for every vehicle illuminated by one beam.

    Each candidate consumes the same number of random draws whether or not it is
    detected, so the noise seen by one vehicle does not depend on the others.

    @params
    states[Sequence[VehicleState]]: True states of the user and its clutter vehicles.
    beams[BeamPair]: Beams steered for this user.
    cfg[ArrayConfig]: Array geometry.
    det[DetectorConfig]: Matched-filter and CFAR settings.
    noise[MeasurementNoiseConfig]: Per-component noise.
    rng[Generator]: Dedicated stream for this beam and epoch.
    sources[Sequence[int]]: Source tag per state, defaults to 0, 1, 2, ...

    @return
    List[Measurement]: Detected measurements in candidate order.
    """
    threshold = cfar_threshold(det)
    sources = list(range(len(states))) if sources is None else list(sources)
    measurements = []

    for state, source in zip(states, sources):
        draws = rng.standard_normal(5)

        target = echo_target(state, cfg, det.rcs)
        kappa_t, kappa_r = beam_gains(target, beams, cfg)
        peak = _peak(target.reflect_coeff, kappa_t, kappa_r, det, draws[:2])

        if not abs(peak) ** 2 > threshold:
            continue

        scale = noise_scale(kappa_t, kappa_r, cfg, noise)
        sigmas = noise.sigmas * scale
        r, v_r, theta = measure_fn(state) + sigmas * draws[2:]

        if r <= 0.0:
            logger.warning(f"Dropping non-physical measurement with range {r:.4f} m from source {source}")
            continue

        measurements.append(
            Measurement(
                range=float(r),
                radial_speed=float(v_r),
                angle=wrap_angle(theta),
                noise_cov=np.diag(sigmas**2),
                source=source,
            )
        )

    return measurements
