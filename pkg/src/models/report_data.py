from __future__ import annotations

from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class MetricsReport(BaseModel):
    """CLEAR-MOT and identity metrics for one result file"""
    name: str = ""
    idf1: float = Field(ge=0.0, le=1.0)
    idp: float = Field(ge=0.0, le=1.0)
    idr: float = Field(ge=0.0, le=1.0)
    mota: float = Field(le=1.0)
    motp: float = Field(ge=0.0, le=1.0)
    mt: float = Field(ge=0.0, le=100.0)  # % of gt targets
    ml: float = Field(ge=0.0, le=100.0)
    fp: int = Field(ge=0)
    fn: int = Field(ge=0)
    ids: int = Field(ge=0)
    frag: int = Field(ge=0)
    num_gt: int = Field(ge=0)
    num_targets: int = Field(ge=0)
    num_matches: int = Field(ge=0)

    def as_row(self) -> Dict[str, Any]:
        """Table-ready row with ratios as percentages."""
        return {
            "name": self.name,
            "IDF1": round(100 * self.idf1, 1),
            "MOTA": round(100 * self.mota, 1),
            "MOTP": round(100 * self.motp, 1),
            "MT": round(self.mt, 1),
            "ML": round(self.ml, 1),
            "FP": self.fp,
            "FN": self.fn,
            "IDS": self.ids,
            "Frag": self.frag,
        }


class SequenceInfo(BaseModel):
    """Sequence metadata (seqinfo.ini)"""
    name: str
    frame_rate: float = Field(default=30.0, gt=0)
    frame_count: int = Field(ge=0)
    feature_dim: int = Field(ge=1)


class SequenceRun(BaseModel):
    """One sequence processed by `track`"""
    name: str
    sequence_dir: str
    frames: int
    detections: int
    tracks: int
    elapsed_seconds: float
    fps: float
    result_path: str
    track_records_path: str


class RunManifest(BaseModel):
    """Reconstructs a tracking run from its inputs"""
    created_at: datetime
    config: Dict[str, Any]
    sequences: List[SequenceRun] = Field(default_factory=list)
    output_dir: str


class TargetSpec(BaseModel):
    """A synthetic target moving along piecewise-linear waypoints (frame, cx, cy)"""
    waypoints: List[Tuple[int, float, float]] = Field(min_length=1)
    width: float = Field(default=40.0, gt=0)
    height: float = Field(default=100.0, gt=0)
    # Overrides the scene-wide feature noise for this target.
    feature_noise: Optional[float] = Field(default=None, ge=0.0)

    @field_validator("waypoints")
    @classmethod
    def _frames_increasing(cls, value: List[Tuple[int, float, float]]) -> List[Tuple[int, float, float]]:
        frames = [w[0] for w in value]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError("waypoint frames must be strictly increasing")
        if frames[0] < 1:
            raise ValueError("waypoint frames start at 1")
        return value

    @property
    def first_frame(self) -> int:
        return self.waypoints[0][0]

    @property
    def last_frame(self) -> int:
        return self.waypoints[-1][0]


class OcclusionWindow(BaseModel):
    """Frames (inclusive) during which a target's detection is suppressed"""
    target: int = Field(ge=0)
    start: int = Field(ge=1)
    end: int = Field(ge=1)
    emit_occluder: bool = True

    @model_validator(mode="after")
    def _ordered(self) -> "OcclusionWindow":
        if self.end < self.start:
            raise ValueError("occlusion window ends before it starts")
        return self


class SyntheticSpec(BaseModel):
    """Scenario description for the synthetic sequence generator"""
    name: str = "synthetic"
    frame_count: int = Field(ge=1)
    frame_rate: float = Field(default=30.0, gt=0)
    feature_dim: int = Field(default=32, ge=1)
    targets: List[TargetSpec]
    feature_noise: float = Field(default=0.0, ge=0.0)
    occlusions: List[OcclusionWindow] = Field(default_factory=list)
    false_positive_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    missed_detection_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    box_noise: float = Field(default=0.0, ge=0.0)  # pixel std of detection jitter
    # Weight of the occluded target's mean in an occluder's feature.
    occluder_feature_mix: float = Field(default=0.65, ge=0.0, le=1.0)
    image_width: float = Field(default=1920.0, gt=0)
    image_height: float = Field(default=1080.0, gt=0)
    seed: int = 0
    identity_means: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _occlusions_reference_targets(self) -> "SyntheticSpec":
        for window in self.occlusions:
            if window.target >= len(self.targets):
                raise ValueError(f"occlusion references unknown target {window.target}")
        if self.identity_means is not None:
            if len(self.identity_means) != len(self.targets):
                raise ValueError("identity_means needs one row per target")
            if any(len(row) != self.feature_dim for row in self.identity_means):
                raise ValueError(f"identity_means rows must have {self.feature_dim} values")
        return self
