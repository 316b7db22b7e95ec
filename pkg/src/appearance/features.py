"""Unit-norm appearance features, cosine distances and the model-domain transform."""

from typing import Optional, Sequence, Union

import numpy as np

from src.utils import DomainError

ArrayLike = Union[float, np.ndarray]


def as_feature(values: Sequence[float]) -> np.ndarray:
    """Read-only float64 vector renormalized to unit length."""
    vec = np.asarray(values, dtype=np.float64).ravel()
    if vec.size == 0:
        raise DomainError("feature must have at least one dimension")
    if not np.all(np.isfinite(vec)):
        raise DomainError("feature contains non-finite values")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise DomainError("feature has zero norm")
    vec = vec / norm
    vec.setflags(write=False)
    return vec


def as_feature_matrix(rows: Sequence[Sequence[float]], dim: Optional[int] = None) -> np.ndarray:
    """Stack features into an N x dim matrix with unit-norm rows."""
    mat = np.asarray(rows, dtype=np.float64)
    if mat.size == 0:
        return np.empty((0, dim or 0), dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[None, :]
    if dim is not None and mat.shape[1] != dim:
        raise DomainError(f"expected feature dimension {dim}, got {mat.shape[1]}")
    if not np.all(np.isfinite(mat)):
        raise DomainError("feature matrix contains non-finite values")
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DomainError("feature matrix has a zero-norm row")
    return mat / norms


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - a.b for unit vectors, clipped to [0, 2]."""
    if a.shape != b.shape:
        raise DomainError(f"feature dimensions differ: {a.shape} vs {b.shape}")
    return float(np.clip(1.0 - np.dot(a, b), 0.0, 2.0))


def cosine_distances(queries: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Pairwise distances, shape (len(queries), len(reference))."""
    queries = np.atleast_2d(queries)
    reference = np.atleast_2d(reference)
    if len(queries) == 0 or len(reference) == 0:
        return np.zeros((len(queries), len(reference)))
    if queries.shape[1] != reference.shape[1]:
        raise DomainError(f"feature dimensions differ: {queries.shape[1]} vs {reference.shape[1]}")
    return np.clip(1.0 - queries @ reference.T, 0.0, 2.0)


def ema_update(smoothed: Optional[np.ndarray], incoming: np.ndarray, eta: float) -> np.ndarray:
    """Exponentially smoothed track feature: eta * smoothed + (1 - eta) * incoming, renormalized."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    if smoothed is None:
        # first observation is adopted unchanged
        first = np.array(incoming, dtype=np.float64).ravel()
        if first.size == 0 or not np.all(np.isfinite(first)):
            raise DomainError("first feature must be a finite, non-empty vector")
        first.setflags(write=False)
        return first

    blended = eta * smoothed + (1.0 - eta) * incoming
    if np.linalg.norm(blended) == 0.0:
        # antipodal inputs with eta = 0.5
        return as_feature(incoming)
    return as_feature(blended)


def to_model_domain(d: ArrayLike) -> ArrayLike:
    """Fourth root of a cosine distance."""
    arr = np.asarray(d, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"distance must be non-negative, got {d!r}")
    out = np.sqrt(np.sqrt(arr))
    return float(out) if out.ndim == 0 else out
