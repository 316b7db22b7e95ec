"""Single-target track state."""

from typing import Any, Dict, List, Optional

import numpy as np

from src.appearance import FeatureGallery, ema_update
from src.config import ASSOCIATION_DEFAULTS, TRACK_LIFECYCLE, TrackState
from src.igmm import IgmmModel
from src.models import BoundingBox, Detection, IgmmConfig
from src.motion import KalmanFilter, KalmanState


class Track:
    """
    Identity, lifecycle state, Kalman state and appearance history of one target.

    `distance_records` holds the model-domain distances of every match; the
    track's mixture has observed exactly those values, in order.
    """

    def __init__(
        self,
        track_id: int,
        kalman: KalmanState,
        detection: Detection,
        frame: int,
        n_init: int = TRACK_LIFECYCLE["n_init"],
        max_age: int = TRACK_LIFECYCLE["max_age"],
        gallery_budget: int = ASSOCIATION_DEFAULTS["gallery_budget"],
        igmm_config: Optional[IgmmConfig] = None,
    ):
        self.track_id = track_id
        self.kalman = kalman
        self.hits = 1
        self.age = 1
        self.time_since_update = 0
        self.created_at = frame
        self.last_update_frame = frame
        self.confidence = detection.confidence

        self.state = TrackState.CONFIRMED if self.hits >= n_init else TrackState.TENTATIVE

        self.gallery = FeatureGallery(gallery_budget)
        self.gallery.add(frame, detection.feature)
        self.smoothed_feature: Optional[np.ndarray] = detection.feature

        self.distance_records: List[float] = []
        self.igmm = IgmmModel(igmm_config)

        self._n_init = n_init
        self._max_age = max_age

    # --- Lifecycle ---
    def predict(self, kf: KalmanFilter) -> None:
        self.kalman = kf.predict(self.kalman)
        self.age += 1
        self.time_since_update += 1

    def update(self, kf: KalmanFilter, detection: Detection, frame: int, eta: float) -> None:
        """Fold a matched detection into motion and appearance state."""
        self.kalman = kf.update(self.kalman, detection.box)
        self.gallery.add(frame, detection.feature)
        self.smoothed_feature = ema_update(self.smoothed_feature, detection.feature, eta)
        self.confidence = detection.confidence

        self.hits += 1
        self.time_since_update = 0
        self.last_update_frame = frame
        if self.state == TrackState.TENTATIVE and self.hits >= self._n_init:
            self.state = TrackState.CONFIRMED

    def mark_missed(self) -> None:
        if self.state == TrackState.TENTATIVE:
            self.state = TrackState.DELETED
        elif self.time_since_update > self._max_age:
            self.state = TrackState.DELETED

    def is_tentative(self) -> bool:
        return self.state == TrackState.TENTATIVE

    def is_confirmed(self) -> bool:
        return self.state == TrackState.CONFIRMED

    def is_deleted(self) -> bool:
        return self.state == TrackState.DELETED

    # --- Views ---
    @property
    def record_count(self) -> int:
        return len(self.distance_records)

    def to_tlwh(self) -> np.ndarray:
        return self.kalman.to_tlwh()

    def to_box(self) -> BoundingBox:
        return self.kalman.to_box()

    def to_record(self) -> Dict[str, Any]:
        """JSON-ready summary used by run manifests and the inspector."""
        return {
            "track_id": self.track_id,
            "state": self.state.value,
            "created_at": self.created_at,
            "last_update_frame": self.last_update_frame,
            "hits": self.hits,
            "distance_records": list(self.distance_records),
            "igmm": self.igmm.to_dict(),
        }

    def __repr__(self) -> str:
        return (
            f"Track(id={self.track_id}, state={self.state.value}, hits={self.hits}, "
            f"tsu={self.time_since_update}, records={self.record_count})"
        )
