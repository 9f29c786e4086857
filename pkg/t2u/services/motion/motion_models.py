import math

import numpy as np
from models.vehicle import ModelKind, ProcessNoiseConfig, VehicleState
from numpy.typing import NDArray

# Below this |omega * dt| the turn terms use their Taylor expansions.
TAYLOR_THRESHOLD = 1e-6


def _turn_terms(omega: float, dt: float) -> tuple[float, float, float, float]:
    """
    Returns sin(w dt)/w, (1 - cos(w dt))/w and their derivatives with respect to w.
    """
    wdt = omega * dt

    if abs(wdt) < TAYLOR_THRESHOLD:
        s = dt * (1.0 - wdt * wdt / 6.0)
        c = dt * wdt / 2.0
        ds = -omega * dt**3 / 3.0
        dc = dt**2 / 2.0 - omega**2 * dt**4 / 8.0
        return s, c, ds, dc

    sin_wdt = math.sin(wdt)
    cos_wdt = math.cos(wdt)

    s = sin_wdt / omega
    c = (1.0 - cos_wdt) / omega
    ds = dt * cos_wdt / omega - sin_wdt / omega**2
    dc = dt * sin_wdt / omega - (1.0 - cos_wdt) / omega**2

    return s, c, ds, dc


def propagate(s: VehicleState, model: ModelKind, dt: float) -> VehicleState:
    """
    Noise-free state evolution over one epoch.

    @params
    s[VehicleState]: State at the start of the epoch.
    model[ModelKind]: CT for the coordinated turn, CV for straight motion (omega
    treated as 0 and reset to 0).
    dt[float]: Epoch duration in seconds.

    @return
    VehicleState: State at the end of the epoch.
    """
    if model == ModelKind.CV:
        return VehicleState(
            x=s.x + s.vx * dt, y=s.y + s.vy * dt, vx=s.vx, vy=s.vy, omega=0.0
        )

    sin_term, cos_term, _, _ = _turn_terms(s.omega, dt)
    wdt = s.omega * dt
    cos_wdt = math.cos(wdt)
    sin_wdt = math.sin(wdt)

    return VehicleState(
        x=s.x + sin_term * s.vx - cos_term * s.vy,
        y=s.y + cos_term * s.vx + sin_term * s.vy,
        vx=s.vx * cos_wdt - s.vy * sin_wdt,
        vy=s.vx * sin_wdt + s.vy * cos_wdt,
        omega=s.omega,
    )


def transition_jacobian(s: VehicleState, model: ModelKind, dt: float) -> NDArray[np.float64]:
    """
    Jacobian of propagate with respect to the state.

    The CV Jacobian keeps a unit (omega, omega) entry so a mixed omega variance is carried
    forward rather than annihilated.
    """
    F = np.eye(5)

    if model == ModelKind.CV:
        F[0, 2] = dt
        F[1, 3] = dt
        return F

    sin_term, cos_term, d_sin, d_cos = _turn_terms(s.omega, dt)
    wdt = s.omega * dt
    cos_wdt = math.cos(wdt)
    sin_wdt = math.sin(wdt)

    F[0, 2] = sin_term
    F[0, 3] = -cos_term
    F[0, 4] = d_sin * s.vx - d_cos * s.vy

    F[1, 2] = cos_term
    F[1, 3] = sin_term
    F[1, 4] = d_cos * s.vx + d_sin * s.vy

    F[2, 2] = cos_wdt
    F[2, 3] = -sin_wdt
    F[2, 4] = -dt * (s.vx * sin_wdt + s.vy * cos_wdt)

    F[3, 2] = sin_wdt
    F[3, 3] = cos_wdt
    F[3, 4] = dt * (s.vx * cos_wdt - s.vy * sin_wdt)

    return F


def process_noise_cov(
    cfg: ProcessNoiseConfig, dt: float, model: ModelKind = ModelKind.CT
) -> NDArray[np.float64]:
    """
    Discretized white-acceleration covariance over [x, y, vx, vy, omega].

    @params
    cfg[ProcessNoiseConfig]: Acceleration standard deviations.
    dt[float]: Epoch duration in seconds.
    model[ModelKind]: CV replaces the omega entry with cfg.cv_omega_variance.

    @return
    NDArray: 5x5 symmetric positive semidefinite matrix.
    """
    Q = np.zeros((5, 5))
    block = np.array([[dt**4 / 4.0, dt**3 / 2.0], [dt**3 / 2.0, dt**2]])

    Q[np.ix_([0, 2], [0, 2])] = block * cfg.sigma_ax**2
    Q[np.ix_([1, 3], [1, 3])] = block * cfg.sigma_ay**2

    if model == ModelKind.CV:
        Q[4, 4] = cfg.cv_omega_variance
    else:
        Q[4, 4] = dt**2 * cfg.sigma_aw**2

    return Q
