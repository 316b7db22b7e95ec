from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class BoundingBox(BaseModel):
    """Detection geometry in MOTChallenge convention (top-left corner, size in pixels)."""

    model_config = ConfigDict(frozen=True)

    left: float
    top: float
    width: float = Field(gt=0)
    height: float = Field(gt=0)
    confidence: float = Field(default=1.0, ge=0.0, le=1.0)

    def to_tlwh(self) -> np.ndarray:
        return np.array([self.left, self.top, self.width, self.height], dtype=np.float64)

    def to_tlbr(self) -> np.ndarray:
        return np.array(
            [self.left, self.top, self.left + self.width, self.top + self.height],
            dtype=np.float64,
        )

    def to_xyah(self) -> np.ndarray:
        """Center x, center y, aspect ratio (w/h), height."""
        return np.array(
            [
                self.left + self.width / 2,
                self.top + self.height / 2,
                self.width / self.height,
                self.height,
            ],
            dtype=np.float64,
        )

    @classmethod
    def from_xyah(cls, xyah: Sequence[float], confidence: float = 1.0) -> "BoundingBox":
        cx, cy, aspect, height = (float(v) for v in xyah[:4])
        width = aspect * height
        return cls(
            left=cx - width / 2,
            top=cy - height / 2,
            width=width,
            height=height,
            confidence=confidence,
        )


@dataclass
class Detection:
    """A box plus its unit-norm appearance feature."""
    box: BoundingBox
    feature: np.ndarray
    index: int = -1  # row index within its frame in det.txt

    @property
    def confidence(self) -> float:
        return self.box.confidence
