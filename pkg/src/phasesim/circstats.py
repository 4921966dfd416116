"""
Circular statistics for angles on (-pi, pi].
"""

import math

import numpy as np

__all__ = [
    "DegenerateDirectionError",
    "resultant",
    "circular_mean",
    "circular_std",
    "std_from_resultant",
    "rayleigh_pvalue",
]


class DegenerateDirectionError(ValueError):
    """The resultant vector is too short to define a mean direction."""


def resultant(angles, weights=None) -> complex:
    """Mean resultant vector ``sum w e^{i phi} / sum w`` as a complex number."""
    angles = np.asarray(angles, dtype=float).ravel()
    if angles.size == 0:
        raise ValueError("no angles")
    z = np.exp(1j * angles)
    if weights is None:
        return complex(z.mean())
    weights = np.asarray(weights, dtype=float).ravel()
    return complex(np.sum(weights * z) / weights.sum())


def circular_mean(angles, weights=None, min_length: float = 1e-6) -> float:
    """Direction of the resultant vector, in (-pi, pi]."""
    r = resultant(angles, weights)
    if abs(r) <= min_length:
        raise DegenerateDirectionError(f"resultant length {abs(r):.3g} defines no direction")
    mean = math.atan2(r.imag, r.real)
    return math.pi if mean == -math.pi else mean


def std_from_resultant(length: float, zero_tol: float = 1e-12) -> float:
    """``sqrt(-2 ln R)``; ``inf`` when ``R`` vanishes."""
    if length <= zero_tol:
        return math.inf
    # R can exceed 1 by round-off
    return math.sqrt(max(0.0, -2.0 * math.log(min(length, 1.0))))


def circular_std(angles, weights=None) -> float:
    return std_from_resultant(abs(resultant(angles, weights)))


def rayleigh_pvalue(angles) -> float:
    """Rayleigh test p-value for uniformity (large-sample approximation)."""
    angles = np.asarray(angles, dtype=float).ravel()
    n = angles.size
    z = n * abs(resultant(angles)) ** 2
    # Zar's correction term
    p = math.exp(math.sqrt(1 + 4 * n + 4 * max(0.0, n * n - n * z)) - (1 + 2 * n))
    return min(1.0, max(0.0, p))
