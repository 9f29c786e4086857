import math
from typing import Tuple

import numpy as np
from common.errors import SingularCovarianceError
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_factor, cho_solve

LOG_2PI = math.log(2.0 * math.pi)


def factor_covariance(S: NDArray[np.float64]) -> Tuple[NDArray[np.float64], bool]:
    """
    Cholesky factorization of a residual covariance.

    @params
    S[NDArray]: Symmetric matrix expected to be positive definite.

    @return
    Tuple: The scipy ``cho_factor`` pair, reusable with ``cho_solve``.
    """
    if not np.all(np.isfinite(S)):
        raise SingularCovarianceError("Residual covariance has non-finite entries")

    try:
        return cho_factor(S, lower=True, check_finite=False)
    except LinAlgError as err:
        raise SingularCovarianceError(
            f"Residual covariance is not positive definite: {err}"
        ) from err


def mahalanobis_squared(residual: NDArray[np.float64], factor) -> float:
    return float(residual @ cho_solve(factor, residual, check_finite=False))


def gaussian_log_density(residual: NDArray[np.float64], factor) -> float:
    """Log of N(residual; 0, S) given the Cholesky factor of S."""
    lower, _ = factor
    log_det = 2.0 * float(np.sum(np.log(np.diag(lower))))
    dim = residual.shape[0]

    return -0.5 * (mahalanobis_squared(residual, factor) + log_det + dim * LOG_2PI)


def floor_variances(cov: NDArray[np.float64], floor: float) -> NDArray[np.float64]:
    """Copy of ``cov`` with every diagonal entry raised to at least ``floor``."""
    cov = np.array(cov, dtype=float)
    diag = np.diag_indices_from(cov)
    cov[diag] = np.maximum(cov[diag], floor)
    return cov
