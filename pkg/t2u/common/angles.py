import numpy as np
from numpy.typing import ArrayLike


def wrap_angle(angle: float) -> float:
    """
    Wraps an angle into (-pi, pi].

    @params
    angle[float]: Angle in radians.

    @return
    float: The equivalent angle in (-pi, pi]; angles already in range come back unchanged.
    """
    if -np.pi < angle <= np.pi:
        return float(angle)

    wrapped = float(np.mod(angle + np.pi, 2.0 * np.pi) - np.pi)
    if wrapped <= -np.pi:
        return float(np.pi)
    return wrapped


def circular_mean(angles: ArrayLike, weights: ArrayLike) -> float:
    """
    Weighted mean direction, computed by averaging unit vectors.

    @params
    angles[ArrayLike]: Angles in radians.
    weights[ArrayLike]: Non-negative weights, same length as angles.

    @return
    float: Mean direction in (-pi, pi].
    """
    angles = np.asarray(angles, dtype=float)
    weights = np.asarray(weights, dtype=float)

    s = float(np.sum(weights * np.sin(angles)))
    c = float(np.sum(weights * np.cos(angles)))

    return wrap_angle(float(np.arctan2(s, c)))
