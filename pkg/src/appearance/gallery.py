"""Per-track feature gallery and nearest-neighbour distances against it."""

from collections import deque
from typing import Deque, List, Optional, Tuple

import numpy as np

from src.config import ASSOCIATION_DEFAULTS
from src.utils import DomainError, InputError, StateError
from .features import cosine_distances


class FeatureGallery:
    """
    Bounded history of (frame, feature) pairs for one track.

    Oldest samples fall out once `budget` is reached.
    """

    def __init__(self, budget: int = ASSOCIATION_DEFAULTS["gallery_budget"]):
        if budget < 1:
            raise DomainError(f"gallery budget must be >= 1, got {budget}")
        self.budget = budget
        self._entries: Deque[Tuple[int, np.ndarray]] = deque(maxlen=budget)
        self._matrix: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def is_empty(self) -> bool:
        return not self._entries

    @property
    def frames(self) -> List[int]:
        return [frame for frame, _ in self._entries]

    @property
    def latest(self) -> np.ndarray:
        if self.is_empty:
            raise StateError("Gallery is empty")
        return self._entries[-1][1]

    @property
    def matrix(self) -> np.ndarray:
        """Stored features as a (len, dim) matrix, oldest first."""
        if self.is_empty:
            raise StateError("Gallery is empty")
        if self._matrix is None:
            self._matrix = np.vstack([feature for _, feature in self._entries])
        return self._matrix

    def add(self, frame: int, feature: np.ndarray) -> None:
        if self._entries:
            last_frame = self._entries[-1][0]
            if frame <= last_frame:
                raise InputError(f"gallery frame {frame} does not follow {last_frame}")
            if feature.shape != self._entries[-1][1].shape:
                raise DomainError(f"feature dimension {feature.shape} does not match gallery")
        self._entries.append((frame, feature))
        self._matrix = None


def _gallery_distances(queries: np.ndarray, gallery: FeatureGallery) -> np.ndarray:
    if gallery.is_empty:
        raise StateError("Distance requested against an empty gallery")
    return cosine_distances(queries, gallery.matrix)


def min_distances(queries: np.ndarray, gallery: FeatureGallery) -> np.ndarray:
    return _gallery_distances(queries, gallery).min(axis=1)


def knn_mean_distances(queries: np.ndarray, gallery: FeatureGallery, k: int) -> np.ndarray:
    """Mean of the min(k, len(gallery)) smallest distances per query."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    distances = _gallery_distances(queries, gallery)
    k_eff = min(k, distances.shape[1])
    return np.sort(distances, axis=1)[:, :k_eff].mean(axis=1)


def min_distance(feature: np.ndarray, gallery: FeatureGallery) -> float:
    return float(min_distances(feature[None, :], gallery)[0])


def knn_mean_distance(feature: np.ndarray, gallery: FeatureGallery, k: int) -> float:
    return float(knn_mean_distances(feature[None, :], gallery, k)[0])
