import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from common.angles import circular_mean, wrap_angle
from common.errors import DimensionMismatchError, NoUsableMeasurementError
from common.gaussian import factor_covariance, gaussian_log_density, mahalanobis_squared
from models.association import AssociationConfig, AssociationResult, PredictedMeasurement
from models.filter import GaussianBelief, MeasurementModel
from models.sensing import Measurement
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

logger = logging.getLogger(__name__)


def predicted_measurement(belief: GaussianBelief, mm: MeasurementModel) -> PredictedMeasurement:
    """
    Predicted measurement of a belief and its residual covariance.

    @params
    belief[GaussianBelief]: Combined prediction of the tracker.
    mm[MeasurementModel]: h, H and Q_m.

    @return
    PredictedMeasurement: z_hat = h(mean), S = H P H^T + Q_m.
    """
    H = mm.jacobian(belief.mean)
    S = H @ belief.cov @ H.T + mm.noise_cov
    S = 0.5 * (S + S.T)

    # fails fast on a singular S
    factor_covariance(S)

    return PredictedMeasurement(mean=mm.fn(belief.mean), residual_cov=S)


def residual(z: Measurement, pm: PredictedMeasurement) -> NDArray[np.float64]:
    diff = z.vector - pm.mean
    diff[2] = wrap_angle(diff[2])
    return diff


def measurement_log_likelihood(z: Measurement, pm: PredictedMeasurement) -> float:
    return gaussian_log_density(residual(z, pm), factor_covariance(pm.residual_cov))


def measurement_likelihood(z: Measurement, pm: PredictedMeasurement) -> float:
    """Gaussian density N(z; z_hat, S) with the angle residual wrapped."""
    return math.exp(measurement_log_likelihood(z, pm))


def association_probabilities(likelihoods: ArrayLike) -> NDArray[np.float64]:
    """
    Normalizes per-measurement likelihoods into association probabilities.

    @params
    likelihoods[ArrayLike]: One non-negative likelihood per measurement.

    @return
    NDArray: beta, summing to 1.
    """
    likelihoods = np.asarray(likelihoods, dtype=float)
    total = likelihoods.sum() if likelihoods.size else 0.0

    if not total > 0:
        raise NoUsableMeasurementError(
            f"No usable measurement among {likelihoods.size} candidates"
        )

    return likelihoods / total


def association_probabilities_from_log(log_likelihoods: ArrayLike) -> NDArray[np.float64]:
    log_likelihoods = np.asarray(log_likelihoods, dtype=float)

    if log_likelihoods.size == 0 or not np.any(np.isfinite(log_likelihoods)):
        raise NoUsableMeasurementError(
            f"No usable measurement among {log_likelihoods.size} candidates"
        )

    beta = np.exp(log_likelihoods - logsumexp(log_likelihoods))
    return beta / beta.sum()


def fuse_measurements(zs: Sequence[Measurement], beta: ArrayLike) -> Measurement:
    """
    Probability-weighted combination of measurements. Angles are averaged on the
    circle; the result keeps the source of the most probable measurement.
    """
    beta = np.asarray(beta, dtype=float)
    if len(zs) != beta.shape[0]:
        raise DimensionMismatchError(f"{len(zs)} measurements but {beta.shape[0]} probabilities")

    best = int(np.argmax(beta))
    if len(zs) == 1 or np.count_nonzero(beta) == 1:
        return zs[best]

    ranges = np.array([z.range for z in zs])
    speeds = np.array([z.radial_speed for z in zs])
    angles = np.array([z.angle for z in zs])
    noise_cov = sum(b * z.noise_cov for b, z in zip(beta, zs))

    return Measurement(
        range=float(beta @ ranges),
        radial_speed=float(beta @ speeds),
        angle=circular_mean(angles, beta),
        noise_cov=noise_cov,
        source=zs[best].source,
    )


def nearest_neighbor(
    zs: Sequence[Measurement], pm: PredictedMeasurement, sigmas: ArrayLike
) -> Measurement:
    """
    Measurement closest to the prediction in noise-normalized units.

    @params
    zs[Sequence[Measurement]]: Candidates.
    pm[PredictedMeasurement]: Prediction of the user.
    sigmas[ArrayLike]: Range, radial-speed and angle noise standard deviations used to
    normalize each component (zero entries leave the component unscaled).

    @return
    Measurement: The closest candidate; the lowest index wins ties.
    """
    if not zs:
        raise NoUsableMeasurementError("Nearest-neighbor association needs at least one measurement")

    return zs[nearest_index(zs, pm, sigmas)]


def nearest_index(
    zs: Sequence[Measurement], pm: PredictedMeasurement, sigmas: ArrayLike
) -> int:
    sigmas = np.asarray(sigmas, dtype=float)
    scale = np.where(sigmas > 0, sigmas, 1.0)
    distances = [float(np.linalg.norm(residual(z, pm) / scale)) for z in zs]

    # argmin returns the first minimum
    return int(np.argmin(distances))


def gate_measurements(
    zs: Sequence[Measurement], pm: PredictedMeasurement, threshold: float
) -> List[Measurement]:
    """Keeps the measurements whose squared Mahalanobis distance is within the gate."""
    factor = factor_covariance(pm.residual_cov)
    return [z for z in zs if mahalanobis_squared(residual(z, pm), factor) <= threshold]


def gate_volume(pm: PredictedMeasurement, threshold: float) -> float:
    """Volume of the 3-D validation ellipsoid {r : r^T S^-1 r <= threshold}."""
    det = float(np.linalg.det(pm.residual_cov))
    return 4.0 / 3.0 * math.pi * threshold**1.5 * math.sqrt(max(det, 0.0))


def _gated(
    zs: Sequence[Measurement], pm: PredictedMeasurement, config: Optional[AssociationConfig]
) -> List[Measurement]:
    if config is None or not config.gate_enabled:
        return list(zs)

    kept = gate_measurements(zs, pm, config.threshold)
    if len(kept) < len(zs):
        logger.debug(f"Gate dropped {len(zs) - len(kept)} of {len(zs)} measurements")

    return kept


def associate_pda(
    zs: Sequence[Measurement],
    pm: PredictedMeasurement,
    config: Optional[AssociationConfig] = None,
) -> AssociationResult:
    """
    Probabilistic data association of one beam's measurements.

    @params
    zs[Sequence[Measurement]]: Detected measurements.
    pm[PredictedMeasurement]: Prediction of the user served by the beam.
    config[AssociationConfig]: Optional gate.

    @return
    AssociationResult: beta over the (gated) measurements and the fused measurement.
    """
    candidates = _gated(zs, pm, config)
    if not candidates:
        raise NoUsableMeasurementError("No measurement left for probabilistic association")

    factor = factor_covariance(pm.residual_cov)
    log_likelihoods = [gaussian_log_density(residual(z, pm), factor) for z in candidates]
    beta = association_probabilities_from_log(log_likelihoods)

    return AssociationResult(
        probabilities=beta,
        fused=fuse_measurements(candidates, beta),
        measurements=tuple(candidates),
    )


def associate_nn(
    zs: Sequence[Measurement],
    pm: PredictedMeasurement,
    sigmas: ArrayLike,
    config: Optional[AssociationConfig] = None,
) -> AssociationResult:
    candidates = _gated(zs, pm, config)
    if not candidates:
        raise NoUsableMeasurementError("No measurement left for nearest-neighbor association")

    index = nearest_index(candidates, pm, sigmas)
    beta = np.zeros(len(candidates))
    beta[index] = 1.0

    return AssociationResult(
        probabilities=beta,
        fused=candidates[index],
        measurements=tuple(candidates),
    )
