"""Scalar/vector Gaussian helpers for the univariate mixture."""

from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import ndtr, ndtri

from src.utils import DomainError

ArrayLike = Union[float, np.ndarray]

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _check_finite(name: str, value: ArrayLike) -> None:
    if not np.all(np.isfinite(value)):
        raise DomainError(f"{name} must be finite, got {value!r}")


def gaussian_pdf(d: ArrayLike, mu: ArrayLike, variance: ArrayLike, validate: bool = True) -> ArrayLike:
    """
    Normal density with the standard 1/sqrt(2*pi*var) normalizer.

    `validate=False` skips the finiteness and positivity checks for callers
    whose parameters are already known to be valid.
    """
    variance = np.asarray(variance, dtype=np.float64)
    if validate:
        _check_finite("d", d)
        _check_finite("mu", mu)
        _check_finite("variance", variance)
        if np.any(variance <= 0):
            raise DomainError(f"variance must be positive, got {variance!r}")

    diff = np.asarray(d, dtype=np.float64) - mu
    density = _INV_SQRT_2PI / np.sqrt(variance) * np.exp(-0.5 * diff * diff / variance)
    return float(density) if np.ndim(density) == 0 else density


def normal_cdf(z: ArrayLike) -> ArrayLike:
    """Standard normal CDF."""
    return ndtr(z)


@lru_cache(maxsize=None)
def chi2_quantile_1dof(p: float) -> float:
    """Quantile of chi-square with one degree of freedom: (Phi^-1((1+p)/2))^2."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    return float(ndtri((1.0 + p) / 2.0) ** 2)
