import logging
from typing import Sequence, Tuple

import numpy as np
from common.angles import wrap_angle
from common.errors import DivergenceError, UnreachableModelError
from common.gaussian import factor_covariance, gaussian_log_density
from models.filter import GaussianBelief, ImmBank, ImmConfig, ImmPrediction, MeasurementModel
from models.vehicle import ModelKind, VehicleState
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import cho_solve
from scipy.special import logsumexp
from services.motion.motion_models import propagate, transition_jacobian

logger = logging.getLogger(__name__)


def _symmetrize(P: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (P + P.T)


def mixing_weights(bank: ImmBank, skip_unreachable: bool = False) -> NDArray[np.float64]:
    """
    Interaction weights c(i|j) = Pi[j, i] rho[j] / sum_j Pi[j, i] rho[j].

    @params
    bank[ImmBank]: Bank at the end of the previous epoch.
    skip_unreachable[bool]: When True, a model nothing can transition into keeps its own
    belief (identity column) instead of raising.

    @return
    NDArray: Matrix W with W[j, i] = c(i|j); every column sums to 1.
    """
    numerators = bank.transition * bank.model_probs[:, None]
    denominators = numerators.sum(axis=0)
    n = len(bank.models)
    weights = np.zeros((n, n))

    for i in range(n):
        if denominators[i] > 0:
            weights[:, i] = numerators[:, i] / denominators[i]
        elif skip_unreachable:
            weights[i, i] = 1.0
        else:
            raise UnreachableModelError(
                f"Model {bank.models[i].value} has zero predicted probability mass"
            )

    return weights


def moment_match(
    beliefs: Sequence[GaussianBelief], weights: ArrayLike
) -> GaussianBelief:
    """
    Single Gaussian with the mean and covariance of a weighted mixture. Zero-weight
    components are left out entirely.
    """
    weights = np.asarray(weights, dtype=float)
    terms = [(w, b) for w, b in zip(weights, beliefs) if w != 0.0]

    mean = sum(w * b.vector for w, b in terms)
    cov = np.zeros((5, 5))
    for w, b in terms:
        spread = mean - b.vector
        cov = cov + w * (b.cov + np.outer(spread, spread))

    return GaussianBelief(mean=VehicleState.from_array(mean), cov=_symmetrize(cov))


def mix_inputs(bank: ImmBank, weights: NDArray[np.float64]) -> Tuple[GaussianBelief, ...]:
    """
    Mixed initial conditions for each model filter.

    @params
    bank[ImmBank]: Bank at the end of the previous epoch.
    weights[NDArray]: Output of mixing_weights.

    @return
    Tuple[GaussianBelief, ...]: One mixed belief per model.
    """
    return tuple(
        moment_match(bank.beliefs, weights[:, i]) for i in range(len(bank.models))
    )


def ekf_predict(
    b: GaussianBelief, model: ModelKind, dt: float, Q: NDArray[np.float64]
) -> GaussianBelief:
    F = transition_jacobian(b.mean, model, dt)
    mean = propagate(b.mean, model, dt)

    return GaussianBelief(mean=mean, cov=_symmetrize(F @ b.cov @ F.T + Q))


def innovation(
    b: GaussianBelief, z: ArrayLike, mm: MeasurementModel
) -> NDArray[np.float64]:
    residual = np.asarray(z, dtype=float) - mm.fn(b.mean)
    if mm.angle_index is not None:
        residual[mm.angle_index] = wrap_angle(residual[mm.angle_index])
    return residual


def ekf_update_log(
    b: GaussianBelief, z: ArrayLike, mm: MeasurementModel
) -> Tuple[GaussianBelief, float]:
    """
    EKF measurement update returning the log-likelihood of the residual.

    @params
    b[GaussianBelief]: Predicted belief.
    z[ArrayLike]: Measurement vector.
    mm[MeasurementModel]: h, H and Q_m.

    @return
    Tuple[GaussianBelief, float]: Posterior (Joseph-form covariance) and
    log N(residual; 0, S).
    """
    H = mm.jacobian(b.mean)
    residual = innovation(b, z, mm)
    S = _symmetrize(H @ b.cov @ H.T + mm.noise_cov)
    factor = factor_covariance(S)

    # K^T = S^-1 H P since S and P are symmetric
    K = cho_solve(factor, H @ b.cov, check_finite=False).T

    I_KH = np.eye(5) - K @ H
    cov = I_KH @ b.cov @ I_KH.T + K @ mm.noise_cov @ K.T
    mean = b.vector + K @ residual

    posterior = GaussianBelief(mean=VehicleState.from_array(mean), cov=_symmetrize(cov))

    return posterior, gaussian_log_density(residual, factor)


def ekf_update(
    b: GaussianBelief, z: ArrayLike, mm: MeasurementModel
) -> Tuple[GaussianBelief, float]:
    posterior, log_likelihood = ekf_update_log(b, z, mm)
    return posterior, float(np.exp(log_likelihood))


def update_model_probs(likelihoods: ArrayLike, bank: ImmBank) -> NDArray[np.float64]:
    """
    Posterior model probabilities rho(i) proportional to L(i) sum_j Pi[j, i] rho(j).

    @params
    likelihoods[ArrayLike]: One non-negative likelihood per model.
    bank[ImmBank]: Bank holding the previous rho and Pi.

    @return
    NDArray: Probability vector.
    """
    numerators = np.asarray(likelihoods, dtype=float) * bank.prior_mass()
    total = numerators.sum()

    if not total > 0:
        raise DivergenceError("Every model explains the measurement with zero likelihood")

    return numerators / total


def update_model_probs_from_log(
    log_likelihoods: ArrayLike, bank: ImmBank
) -> NDArray[np.float64]:
    """Same as update_model_probs with log-likelihoods, immune to underflow."""
    with np.errstate(divide="ignore"):
        log_numerators = np.asarray(log_likelihoods, dtype=float) + np.log(bank.prior_mass())

    if not np.any(np.isfinite(log_numerators)):
        raise DivergenceError("Every model explains the measurement with zero likelihood")

    probs = np.exp(log_numerators - logsumexp(log_numerators))
    return probs / probs.sum()


def combined_prediction(
    bank: ImmBank, predictions: Sequence[GaussianBelief]
) -> VehicleState:
    """Model-probability weighted sum of the per-model predicted states."""
    return moment_match(predictions, bank.model_probs).mean


def imm_predict(
    bank: ImmBank, dt: float, Qs: Sequence[NDArray[np.float64]]
) -> ImmPrediction:
    """
    Interaction and per-model prediction for one epoch.

    @params
    bank[ImmBank]: Bank at the end of the previous epoch.
    dt[float]: Epoch duration in seconds.
    Qs[Sequence[NDArray]]: Process noise covariance per model.

    @return
    ImmPrediction: Predicted beliefs, prior model mass and the combined prediction.
    """
    prior_mass = bank.prior_mass()
    active = tuple(bool(mass > 0) for mass in prior_mass)
    weights = mixing_weights(bank, skip_unreachable=True)
    mixed = mix_inputs(bank, weights)

    predicted = tuple(
        ekf_predict(mixed[i], model, dt, Qs[i]) if active[i] else bank.beliefs[i]
        for i, model in enumerate(bank.models)
    )

    return ImmPrediction(
        bank=bank,
        predicted=predicted,
        prior_mass=prior_mass,
        combined=moment_match(predicted, bank.model_probs),
        active=active,
    )


def imm_update(
    prediction: ImmPrediction, z: ArrayLike, mm: MeasurementModel
) -> ImmBank:
    """
    Per-model EKF update with one (possibly fused) measurement followed by the
    model-probability update.
    """
    bank = prediction.bank
    beliefs = []
    log_likelihoods = []

    for i, belief in enumerate(prediction.predicted):
        if not prediction.active[i]:
            beliefs.append(belief)
            log_likelihoods.append(-np.inf)
            continue

        posterior, log_likelihood = ekf_update_log(belief, z, mm)
        beliefs.append(posterior)
        log_likelihoods.append(log_likelihood)

    probs = update_model_probs_from_log(log_likelihoods, bank)

    return ImmBank(
        beliefs=tuple(beliefs),
        model_probs=probs,
        transition=bank.transition,
        models=bank.models,
    )


def coast(prediction: ImmPrediction) -> ImmBank:
    """Prediction-only update used when an epoch yields no usable measurement."""
    bank = prediction.bank
    return ImmBank(
        beliefs=prediction.predicted,
        model_probs=prediction.prior_mass / prediction.prior_mass.sum(),
        transition=bank.transition,
        models=bank.models,
    )


def imm_step(
    bank: ImmBank,
    z: ArrayLike,
    mm: MeasurementModel,
    dt: float,
    Qs: Sequence[NDArray[np.float64]],
) -> Tuple[ImmBank, VehicleState]:
    """
    One full IMM cycle: mixing, prediction, update and model-probability update.

    @return
    Tuple[ImmBank, VehicleState]: Updated bank and the combined prediction made before
    the update (the one beams are steered with).
    """
    prediction = imm_predict(bank, dt, Qs)
    return imm_update(prediction, z, mm), prediction.combined.mean


def combined_posterior(bank: ImmBank) -> GaussianBelief:
    return moment_match(bank.beliefs, bank.model_probs)


def initial_bank(
    z0: ArrayLike,
    z1: ArrayLike,
    dt: float,
    cfg: ImmConfig,
    single_model: bool = False,
    models: Tuple[ModelKind, ...] = (ModelKind.CV, ModelKind.CT),
) -> ImmBank:
    """
    Builds a bank from two consecutive (range, radial speed, angle) measurements.

    Position comes from the later measurement, velocity from differencing the two
    positions, omega starts at 0.

    @params
    z0[ArrayLike]: Measurement one epoch before z1.
    z1[ArrayLike]: Latest measurement.
    dt[float]: Time between the two measurements.
    cfg[ImmConfig]: Initial probabilities, covariance and switching matrix.
    single_model[bool]: Pins the bank to its first model (Pi = identity, rho = (1, 0)).

    @return
    ImmBank: The initialized bank.
    """
    r0, _, theta0 = np.asarray(z0, dtype=float)
    r1, _, theta1 = np.asarray(z1, dtype=float)

    p0 = np.array([r0 * np.cos(theta0), r0 * np.sin(theta0)])
    p1 = np.array([r1 * np.cos(theta1), r1 * np.sin(theta1)])
    v = (p1 - p0) / dt

    mean = VehicleState(x=p1[0], y=p1[1], vx=v[0], vy=v[1], omega=0.0)
    cov = np.diag(np.asarray(cfg.initial_cov_diag, dtype=float))
    belief = GaussianBelief(mean=mean, cov=cov)

    if single_model:
        transition = np.eye(len(models))
        probs = np.zeros(len(models))
        probs[0] = 1.0
    else:
        transition = np.asarray(cfg.transition, dtype=float)
        probs = np.asarray(cfg.initial_probs, dtype=float)

    logger.debug(f"Initialized bank at ({mean.x:.2f}, {mean.y:.2f}) m")

    return ImmBank(
        beliefs=tuple(belief for _ in models),
        model_probs=probs,
        transition=transition,
        models=models,
    )

