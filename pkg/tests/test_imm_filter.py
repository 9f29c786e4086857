import math

import numpy as np
import pytest
from common.errors import ConfigError, DivergenceError, UnreachableModelError
from models.filter import GaussianBelief, ImmBank, ImmConfig, MeasurementModel
from models.sensing import MeasurementNoiseConfig
from models.vehicle import ModelKind, VehicleState
from services.motion.motion_models import process_noise_cov, propagate
from services.sensing.frontend import measure_fn, radar_measurement_model
from services.tracking.imm_filter import (
    coast,
    combined_prediction,
    combined_posterior,
    ekf_predict,
    ekf_update,
    ekf_update_log,
    imm_predict,
    imm_step,
    imm_update,
    initial_bank,
    mix_inputs,
    mixing_weights,
    moment_match,
    update_model_probs,
    update_model_probs_from_log,
)

DT = 0.75


def _belief(x=10.0, y=20.0, vx=1.0, vy=0.0, omega=0.0, cov=None):
    return GaussianBelief(
        mean=VehicleState(x=x, y=y, vx=vx, vy=vy, omega=omega),
        cov=np.eye(5) if cov is None else cov,
    )


def _bank(probs=(0.5, 0.5), transition=((0.95, 0.05), (0.05, 0.95))):
    return ImmBank(
        beliefs=(_belief(), _belief(omega=0.1)),
        model_probs=np.array(probs),
        transition=np.array(transition),
    )


def _position_model():
    return MeasurementModel(
        fn=lambda s: np.array([s.x, s.y]),
        jacobian=lambda s: np.eye(2, 5),
        noise_cov=np.eye(2),
        angle_index=None,
    )


def _noise_qs(cfg: ImmConfig):
    return [process_noise_cov(cfg.process_noise, DT, model) for model in (ModelKind.CV, ModelKind.CT)]


def test_mixing_weights_hand_case():
    W = mixing_weights(_bank())

    np.testing.assert_allclose(W, [[0.95, 0.05], [0.05, 0.95]])
    np.testing.assert_allclose(W.sum(axis=0), 1.0)


def test_mixing_weights_unreachable_model():
    bank = _bank(probs=(1.0, 0.0), transition=((1.0, 0.0), (0.0, 1.0)))

    with pytest.raises(UnreachableModelError):
        mixing_weights(bank)

    np.testing.assert_array_equal(mixing_weights(bank, skip_unreachable=True), np.eye(2))


def test_bank_rejects_invalid_probabilities():
    with pytest.raises(ConfigError):
        _bank(probs=(0.7, 0.7))
    with pytest.raises(ConfigError):
        _bank(transition=((0.5, 0.4), (0.5, 0.5)))


def test_moment_match_identical_components():
    b = _belief(cov=np.diag([1.0, 2.0, 3.0, 4.0, 5.0]))
    out = moment_match([b, b], [0.3, 0.7])

    np.testing.assert_allclose(out.vector, b.vector)
    np.testing.assert_allclose(out.cov, b.cov)


def test_moment_match_adds_spread_of_means():
    a = _belief(x=0.0, cov=np.zeros((5, 5)))
    b = _belief(x=2.0, cov=np.zeros((5, 5)))
    out = moment_match([a, b], [0.5, 0.5])

    assert out.mean.x == pytest.approx(1.0)
    assert out.cov[0, 0] == pytest.approx(1.0)


def test_mix_inputs_blends_turn_rates():
    bank = _bank()
    cv, ct = mix_inputs(bank, mixing_weights(bank))

    assert cv.mean.omega == pytest.approx(0.005)
    assert ct.mean.omega == pytest.approx(0.095)
    assert cv.cov[4, 4] == pytest.approx(1.0 + 0.95 * 0.05 * 0.1**2)
    assert cv.mean.x == pytest.approx(10.0)


def test_ekf_update_linear_case():
    prior = _belief(x=0.0, y=0.0)
    posterior, likelihood = ekf_update(prior, [2.0, 2.0], _position_model())

    assert posterior.mean.x == pytest.approx(1.0)
    assert posterior.mean.y == pytest.approx(1.0)
    assert posterior.cov[0, 0] == pytest.approx(0.5)
    # residual (2, 2) with S = 2 I
    assert likelihood == pytest.approx(math.exp(-2.0) / (4.0 * math.pi), rel=1e-12)


def test_ekf_update_log_matches_linear_likelihood():
    prior = _belief(x=0.0, y=0.0)
    _, log_likelihood = ekf_update_log(prior, [0.5, -1.0], _position_model())
    _, likelihood = ekf_update(prior, [0.5, -1.0], _position_model())

    assert math.exp(log_likelihood) == pytest.approx(likelihood, rel=1e-12)


def test_ekf_predict_propagates_mean_and_covariance():
    b = _belief(vx=2.0)
    out = ekf_predict(b, ModelKind.CV, DT, np.zeros((5, 5)))

    assert out.mean.x == pytest.approx(10.0 + 2.0 * DT)
    assert out.cov[0, 0] == pytest.approx(1.0 + DT**2)


def test_update_model_probs_hand_case():
    probs = update_model_probs([1.0, 3.0], _bank())
    np.testing.assert_allclose(probs, [0.25, 0.75])


def test_update_model_probs_zero_likelihoods():
    with pytest.raises(DivergenceError):
        update_model_probs([0.0, 0.0], _bank())
    with pytest.raises(DivergenceError):
        update_model_probs_from_log([-np.inf, -np.inf], _bank())


def test_log_domain_probabilities_survive_underflow():
    probs = update_model_probs_from_log([-2000.0, -2000.0 - math.log(3.0)], _bank())

    np.testing.assert_allclose(probs, [0.75, 0.25])
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_initial_bank_from_two_measurements():
    bank = initial_bank([10.0, 0.0, 0.0], [11.0, 0.0, 0.0], 1.0, ImmConfig())

    np.testing.assert_allclose(bank.beliefs[0].vector, [11.0, 0.0, 1.0, 0.0, 0.0])
    np.testing.assert_allclose(bank.model_probs, [0.5, 0.5])
    assert bank.models == (ModelKind.CV, ModelKind.CT)


def test_single_model_bank_is_pinned():
    bank = initial_bank([10.0, 0.0, 0.0], [11.0, 0.0, 0.0], 1.0, ImmConfig(), single_model=True)

    np.testing.assert_array_equal(bank.model_probs, [1.0, 0.0])
    np.testing.assert_array_equal(bank.transition, np.eye(2))


def test_coast_keeps_predictions_and_prior_mass():
    cfg = ImmConfig()
    bank = _bank(probs=(0.8, 0.2))
    prediction = imm_predict(bank, DT, _noise_qs(cfg))
    coasted = coast(prediction)

    np.testing.assert_allclose(coasted.model_probs, [0.8 * 0.95 + 0.2 * 0.05, 0.8 * 0.05 + 0.2 * 0.95])
    assert coasted.beliefs is prediction.predicted


def test_imm_step_is_predict_then_update():
    cfg = ImmConfig()
    bank = _bank()
    mm = radar_measurement_model(MeasurementNoiseConfig())
    z = measure_fn(VehicleState(x=10.8, y=20.1, vx=1.0, vy=0.0))

    stepped, predicted = imm_step(bank, z, mm, DT, _noise_qs(cfg))
    prediction = imm_predict(bank, DT, _noise_qs(cfg))
    updated = imm_update(prediction, z, mm)

    np.testing.assert_array_equal(stepped.model_probs, updated.model_probs)
    assert predicted == prediction.combined.mean


def test_single_model_bank_equals_plain_ekf():
    cfg = ImmConfig()
    mm = radar_measurement_model(MeasurementNoiseConfig())
    rng = np.random.default_rng(3)
    truth = VehicleState(x=-20.0, y=30.0, vx=8.0, vy=1.0)

    z0 = measure_fn(truth) + MeasurementNoiseConfig().sigmas * rng.standard_normal(3)
    truth = propagate(truth, ModelKind.CV, DT)
    z1 = measure_fn(truth) + MeasurementNoiseConfig().sigmas * rng.standard_normal(3)

    bank = initial_bank(z0, z1, DT, cfg, single_model=True)
    belief = bank.beliefs[0]
    Q = process_noise_cov(cfg.process_noise, DT, ModelKind.CV)

    for _ in range(3):
        truth = propagate(truth, ModelKind.CV, DT)
        z = measure_fn(truth) + MeasurementNoiseConfig().sigmas * rng.standard_normal(3)

        bank, _ = imm_step(bank, z, mm, DT, _noise_qs(cfg))
        belief = ekf_predict(belief, ModelKind.CV, DT, Q)
        belief, _ = ekf_update_log(belief, z, mm)

    np.testing.assert_allclose(combined_posterior(bank).vector, belief.vector, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(combined_posterior(bank).cov, belief.cov, rtol=1e-12, atol=1e-15)
    np.testing.assert_array_equal(bank.model_probs, [1.0, 0.0])


def test_probabilities_and_covariances_stay_valid_over_many_steps():
    cfg = ImmConfig()
    noise = MeasurementNoiseConfig()
    mm = radar_measurement_model(noise)
    rng = np.random.default_rng(2024)
    dt = 0.1
    Qs = [process_noise_cov(cfg.process_noise, dt, model) for model in (ModelKind.CV, ModelKind.CT)]

    truth = VehicleState(x=60.0, y=40.0, vx=5.0, vy=-3.0, omega=0.1)
    z0 = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
    truth = propagate(truth, ModelKind.CT, dt)
    z1 = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
    bank = initial_bank(z0, z1, dt, cfg)

    for step in range(10_000):
        truth = propagate(truth, ModelKind.CT, dt)
        prediction = imm_predict(bank, dt, Qs)

        if step % 50 == 49:
            bank = coast(prediction)
        else:
            z = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
            bank = imm_update(prediction, z, mm)

        assert abs(bank.model_probs.sum() - 1.0) < 1e-10
        for belief in bank.beliefs:
            np.testing.assert_array_equal(belief.cov, belief.cov.T)
            assert np.min(np.linalg.eigvalsh(belief.cov)) > -1e-9


def _mean_ct_probability(turn_rate: float) -> float:
    cfg = ImmConfig()
    noise = MeasurementNoiseConfig()
    mm = radar_measurement_model(noise)
    rng = np.random.default_rng(99)

    truth = VehicleState(x=-10.0, y=40.0, vx=10.0, vy=0.0, omega=turn_rate)
    z0 = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
    truth = propagate(truth, ModelKind.CT, DT)
    z1 = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
    bank = initial_bank(z0, z1, DT, cfg)

    history = []
    for _ in range(20):
        truth = propagate(truth, ModelKind.CT, DT)
        z = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
        bank, _ = imm_step(bank, z, mm, DT, _noise_qs(cfg))
        history.append(bank.model_probs[1])

    return float(np.mean(history[-10:]))


def test_turning_target_raises_ct_probability():
    assert _mean_ct_probability(0.3) > _mean_ct_probability(0.0)


def test_update_model_probs_with_identity_transition():
    bank = _bank(transition=((1.0, 0.0), (0.0, 1.0)))

    np.testing.assert_allclose(update_model_probs([2.0, 1.0], bank), [2.0 / 3.0, 1.0 / 3.0])
    np.testing.assert_allclose(update_model_probs([1.0, 0.0], _bank()), [1.0, 0.0])


def test_common_likelihood_scale_cancels():
    bank = _bank(probs=(0.3, 0.7))

    np.testing.assert_allclose(
        update_model_probs([0.2, 0.5], bank), update_model_probs([2e-6, 5e-6], bank), rtol=1e-12
    )


def test_combined_prediction_weights_models():
    bank = _bank(probs=(0.25, 0.75))
    predictions = (_belief(x=0.0), _belief(x=4.0))

    assert combined_prediction(bank, predictions).x == pytest.approx(3.0)


def test_angle_residual_is_wrapped_in_the_update():
    mm = radar_measurement_model(MeasurementNoiseConfig())
    prior = _belief(x=10.0, y=20.0)
    z = measure_fn(VehicleState(x=10.1, y=19.9, vx=1.0, vy=0.0))

    plain, _ = ekf_update(prior, z, mm)
    shifted, _ = ekf_update(prior, z + np.array([0.0, 0.0, 2 * math.pi]), mm)

    np.testing.assert_allclose(shifted.vector, plain.vector, atol=1e-9)


def test_stationary_target_with_exact_measurements():
    cfg = ImmConfig()
    mm = radar_measurement_model(MeasurementNoiseConfig())
    truth = VehicleState(x=20.0, y=30.0, vx=0.0, vy=0.0)
    z = measure_fn(truth)

    bank = initial_bank(z, z, DT, cfg)
    for _ in range(10):
        bank, _ = imm_step(bank, z, mm, DT, _noise_qs(cfg))

    estimate = combined_posterior(bank).mean
    assert math.hypot(estimate.x - truth.x, estimate.y - truth.y) < MeasurementNoiseConfig().sigma_range


def test_straight_target_favors_cv_within_five_epochs():
    cfg = ImmConfig()
    noise = MeasurementNoiseConfig()
    mm = radar_measurement_model(noise)
    rng = np.random.default_rng(8)

    truth = VehicleState(x=-10.0, y=40.0, vx=10.0, vy=0.0)
    z0 = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
    truth = propagate(truth, ModelKind.CV, DT)
    z1 = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
    bank = initial_bank(z0, z1, DT, cfg)

    rho_cv = []
    for _ in range(5):
        truth = propagate(truth, ModelKind.CV, DT)
        z = measure_fn(truth) + noise.sigmas * rng.standard_normal(3)
        bank, _ = imm_step(bank, z, mm, DT, _noise_qs(cfg))
        rho_cv.append(bank.model_probs[0])

    assert max(rho_cv) > 0.5
