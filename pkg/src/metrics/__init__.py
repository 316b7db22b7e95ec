from .clear_mot import (
    iou_matrix,
    FrameAnnotations,
    FrameMatch,
    match_frame,
    frames_from_table,
    evaluate,
    metrics_table,
)

__all__ = [
    "iou_matrix",
    "FrameAnnotations",
    "FrameMatch",
    "match_frame",
    "frames_from_table",
    "evaluate",
    "metrics_table",
]
