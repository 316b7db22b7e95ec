"""
Online tracker: predict, associate, update, manage lifecycle, emit.
"""

import logging
import time
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from src.association import associate, record_assignment_distance
from src.config import MOT_RESULT_COLUMNS, TrackState
from src.models import BoundingBox, Detection, TrackerConfig
from src.motion import KalmanFilter
from src.utils import InputError
from .track import Track

logger = logging.getLogger(__name__)

FrameOutput = List[Tuple[int, BoundingBox]]


class MultiObjectTracker:
    """Frame-by-frame detection-to-track association under one strategy."""

    def __init__(self, config: Optional[TrackerConfig] = None, kf: Optional[KalmanFilter] = None):
        self.config = config or TrackerConfig()
        self.kf = kf or KalmanFilter()

        self.tracks: List[Track] = []
        self.finished: List[Track] = []
        self._next_id = 1
        self._last_frame: Optional[int] = None
        self.frames_processed = 0

        logger.info(f"Tracker initialized with {self.config.strategy.label}")

    def step(self, frame: int, detections: Sequence[Detection]) -> FrameOutput:
        """Process one frame; returns (track id, box) of confirmed tracks matched in it."""
        if self._last_frame is not None and frame <= self._last_frame:
            raise InputError(f"frame {frame} does not follow frame {self._last_frame}")
        self._last_frame = frame
        start = time.perf_counter()

        for track in self.tracks:
            track.predict(self.kf)

        strategy = self.config.strategy
        assignment = associate(
            detections,
            self.tracks,
            strategy,
            max_age=self.config.max_age,
            kf=self.kf if self.config.motion_gating else None,
            gating_threshold=self.config.gating_threshold,
        )

        for (det_idx, trk_idx), d_raw in zip(assignment.matches, assignment.match_distances):
            track = self.tracks[trk_idx]
            track.update(self.kf, detections[det_idx], frame, strategy.eta)
            record_assignment_distance(track, d_raw)

        for trk_idx in assignment.unmatched_tracks:
            self.tracks[trk_idx].mark_missed()

        for det_idx in assignment.unmatched_detections:
            detection = detections[det_idx]
            if detection.confidence >= self.config.score_threshold:
                self._initiate_track(detection, frame)

        deleted = [t for t in self.tracks if t.is_deleted()]
        if deleted:
            logger.debug(f"Frame {frame}: deleting tracks {[t.track_id for t in deleted]}")
            self.finished.extend(deleted)
            self.tracks = [t for t in self.tracks if not t.is_deleted()]

        output = self._emit(frame)
        self.frames_processed += 1

        elapsed_ms = (time.perf_counter() - start) * 1000
        logger.debug(
            f"Frame {frame}: {len(detections)} detections, {len(assignment.matches)} matches, "
            f"{len(self.tracks)} live tracks, {elapsed_ms:.2f}ms"
        )
        return output

    def run_sequence(self, frames: Iterable[Tuple[int, Sequence[Detection]]]) -> pd.DataFrame:
        """Run `step` over (frame, detections) pairs; returns MOT result rows."""
        rows = []
        for frame, detections in frames:
            for track_id, box in self.step(frame, detections):
                rows.append((frame, track_id, box.left, box.top, box.width, box.height))

        results = pd.DataFrame(rows, columns=MOT_RESULT_COLUMNS)
        results = results.astype(
            {"frame": "int64", "id": "int64", "left": "float64", "top": "float64", "width": "float64", "height": "float64"}
        )
        return results.sort_values(["frame", "id"], kind="stable").reset_index(drop=True)

    def export_track_records(self) -> List[Dict[str, Any]]:
        """Distance records and mixture state of every track created so far."""
        everything = self.finished + self.tracks
        return [t.to_record() for t in sorted(everything, key=lambda t: t.track_id)]

    def get_status(self) -> Dict[str, Any]:
        counts = {state.value: 0 for state in TrackState}
        for track in self.tracks:
            counts[track.state.value] += 1
        counts[TrackState.DELETED.value] = len(self.finished)
        return {
            "strategy": self.config.strategy.label,
            "frames_processed": self.frames_processed,
            "last_frame": self._last_frame,
            "tracks": counts,
            "next_id": self._next_id,
        }

    def _initiate_track(self, detection: Detection, frame: int) -> None:
        track = Track(
            self._next_id,
            self.kf.initiate(detection.box),
            detection,
            frame,
            n_init=self.config.n_init,
            max_age=self.config.max_age,
            gallery_budget=self.config.gallery_budget,
            igmm_config=self.config.igmm,
        )
        self.tracks.append(track)
        self._next_id += 1

    def _emit(self, frame: int) -> FrameOutput:
        output: FrameOutput = []
        for track in sorted(self.tracks, key=lambda t: t.track_id):
            if not track.is_confirmed() or track.time_since_update > 0:
                continue
            left, top, width, height = track.to_tlwh()
            if width <= 0 or height <= 0:
                logger.warning(f"Frame {frame}: track {track.track_id} has a degenerate box, not emitted")
                continue
            output.append(
                (
                    track.track_id,
                    BoundingBox(
                        left=float(left),
                        top=float(top),
                        width=float(width),
                        height=float(height),
                        confidence=track.confidence,
                    ),
                )
            )
        return output
