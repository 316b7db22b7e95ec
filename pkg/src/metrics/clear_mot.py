"""
CLEAR-MOT and identity metrics.

Per-frame correspondences are built with IoU >= threshold, keeping last
frame's pairs where they still overlap enough and solving the rest with the
Hungarian primitive. Identity measures match gt and hypothesis ids once for
the whole sequence on their co-occurrence counts.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.association import linear_assignment
from src.config import INFEASIBLE_OFFSET, METRICS_THRESHOLDS
from src.models import BoundingBox, MetricsReport
from src.utils import InputError

logger = logging.getLogger(__name__)

_INFEASIBLE = 1.0 + INFEASIBLE_OFFSET


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of tlwh boxes, shape (len(a), len(b))."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))

    a_tl, a_br = a[:, None, :2], a[:, None, :2] + a[:, None, 2:]
    b_tl, b_br = b[None, :, :2], b[None, :, :2] + b[None, :, 2:]
    wh = np.clip(np.minimum(a_br, b_br) - np.maximum(a_tl, b_tl), 0.0, None)
    intersection = wh[..., 0] * wh[..., 1]
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - intersection
    return np.where(union > 0, intersection / np.where(union > 0, union, 1.0), 0.0)


@dataclass
class FrameAnnotations:
    """Identities and tlwh boxes present in one frame."""
    ids: np.ndarray
    boxes: np.ndarray

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64).ravel()
        self.boxes = np.asarray(self.boxes, dtype=np.float64).reshape(-1, 4)
        if len(self.ids) != len(self.boxes):
            raise InputError(f"{len(self.ids)} ids for {len(self.boxes)} boxes")
        if len(np.unique(self.ids)) != len(self.ids):
            raise InputError(f"duplicate ids within a frame: {self.ids.tolist()}")

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def empty(cls) -> "FrameAnnotations":
        return cls(ids=np.empty(0, dtype=np.int64), boxes=np.empty((0, 4)))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, BoundingBox]]) -> "FrameAnnotations":
        if not pairs:
            return cls.empty()
        return cls(ids=[i for i, _ in pairs], boxes=np.vstack([box.to_tlwh() for _, box in pairs]))


@dataclass
class FrameMatch:
    pairs: List[Tuple[int, int]] = field(default_factory=list)  # (gt id, hyp id)
    ious: List[float] = field(default_factory=list)
    unmatched_gt: List[int] = field(default_factory=list)
    unmatched_hyp: List[int] = field(default_factory=list)


def match_frame(
    gt: FrameAnnotations,
    hyp: FrameAnnotations,
    iou_threshold: float = METRICS_THRESHOLDS["iou_threshold"],
    previous: Optional[Mapping[int, int]] = None,
) -> FrameMatch:
    """Correspondences for one frame; `previous` maps gt id to last frame's hyp id."""
    ious = iou_matrix(gt.boxes, hyp.boxes)
    gt_pos = {int(g): i for i, g in enumerate(gt.ids)}
    hyp_pos = {int(h): j for j, h in enumerate(hyp.ids)}

    result = FrameMatch()
    taken_gt, taken_hyp = set(), set()
    for g, h in (previous or {}).items():
        i, j = gt_pos.get(g), hyp_pos.get(h)
        if i is None or j is None or ious[i, j] < iou_threshold:
            continue
        result.pairs.append((g, h))
        result.ious.append(float(ious[i, j]))
        taken_gt.add(i)
        taken_hyp.add(j)

    free_gt = [i for i in range(len(gt)) if i not in taken_gt]
    free_hyp = [j for j in range(len(hyp)) if j not in taken_hyp]
    if free_gt and free_hyp:
        sub = ious[np.ix_(free_gt, free_hyp)]
        costs = np.where(sub >= iou_threshold, 1.0 - sub, _INFEASIBLE)
        rows, cols = linear_assignment(costs, infeasible=_INFEASIBLE)
        for r, c in zip(rows, cols):
            i, j = free_gt[r], free_hyp[c]
            result.pairs.append((int(gt.ids[i]), int(hyp.ids[j])))
            result.ious.append(float(ious[i, j]))
            taken_gt.add(i)
            taken_hyp.add(j)

    result.unmatched_gt = [int(gt.ids[i]) for i in range(len(gt)) if i not in taken_gt]
    result.unmatched_hyp = [int(hyp.ids[j]) for j in range(len(hyp)) if j not in taken_hyp]
    return result


def frames_from_table(table: pd.DataFrame) -> Dict[int, FrameAnnotations]:
    """Group frame,id,left,top,width,height rows by frame."""
    frames: Dict[int, FrameAnnotations] = {}
    if table is None or table.empty:
        return frames
    for frame, rows in table.groupby("frame", sort=True):
        frames[int(frame)] = FrameAnnotations(
            ids=rows["id"].to_numpy(),
            boxes=rows[["left", "top", "width", "height"]].to_numpy(dtype=np.float64),
        )
    return frames


def _as_frames(data) -> Dict[int, FrameAnnotations]:
    if isinstance(data, pd.DataFrame):
        return frames_from_table(data)
    return {int(k): v for k, v in data.items()}


def evaluate(
    gt,
    hyp,
    iou_threshold: float = METRICS_THRESHOLDS["iou_threshold"],
    name: str = "",
) -> MetricsReport:
    """
    Score a hypothesis sequence against ground truth.

    Both inputs are either MOT tables (frame, id, left, top, width, height)
    or mappings frame -> FrameAnnotations.
    """
    gt_frames, hyp_frames = _as_frames(gt), _as_frames(hyp)
    all_frames = sorted(set(gt_frames) | set(hyp_frames))

    fp = fn = ids = 0
    num_gt = num_hyp = 0
    iou_sum, num_matches = 0.0, 0

    previous: Dict[int, int] = {}
    last_hyp: Dict[int, int] = {}
    tracked: Dict[int, List[bool]] = {}

    gt_totals: Dict[int, int] = {}
    hyp_totals: Dict[int, int] = {}
    overlap: Dict[Tuple[int, int], int] = {}

    for frame in all_frames:
        gt_f = gt_frames.get(frame, FrameAnnotations.empty())
        hyp_f = hyp_frames.get(frame, FrameAnnotations.empty())
        num_gt += len(gt_f)
        num_hyp += len(hyp_f)

        match = match_frame(gt_f, hyp_f, iou_threshold, previous)
        fp += len(match.unmatched_hyp)
        fn += len(match.unmatched_gt)
        iou_sum += sum(match.ious)
        num_matches += len(match.pairs)

        matched = dict(match.pairs)
        for g in gt_f.ids.tolist():
            tracked.setdefault(g, []).append(g in matched)
        for g, h in match.pairs:
            if g in last_hyp and last_hyp[g] != h:
                ids += 1
            last_hyp[g] = h
        previous = matched

        # identity co-occurrence
        for g in gt_f.ids.tolist():
            gt_totals[g] = gt_totals.get(g, 0) + 1
        for h in hyp_f.ids.tolist():
            hyp_totals[h] = hyp_totals.get(h, 0) + 1
        ious = iou_matrix(gt_f.boxes, hyp_f.boxes)
        for i, j in zip(*np.nonzero(ious >= iou_threshold)):
            key = (int(gt_f.ids[i]), int(hyp_f.ids[j]))
            overlap[key] = overlap.get(key, 0) + 1

    idtp = _identity_true_positives(gt_totals, hyp_totals, overlap)
    idfn, idfp = num_gt - idtp, num_hyp - idtp

    frag = sum(sum(1 for a, b in zip(flags, flags[1:]) if a and not b) for flags in tracked.values())
    ratios = [sum(flags) / len(flags) for flags in tracked.values()]
    num_targets = len(ratios)
    mt = sum(1 for r in ratios if r >= METRICS_THRESHOLDS["mostly_tracked"])
    ml = sum(1 for r in ratios if r <= METRICS_THRESHOLDS["mostly_lost"])

    if num_gt == 0:
        logger.warning(f"{name or 'evaluation'}: ground truth is empty")

    return MetricsReport(
        name=name,
        idf1=2 * idtp / (num_gt + num_hyp) if num_gt + num_hyp else 0.0,
        idp=idtp / (idtp + idfp) if idtp + idfp else 0.0,
        idr=idtp / (idtp + idfn) if idtp + idfn else 0.0,
        mota=1.0 - (fp + fn + ids) / num_gt if num_gt else 0.0,
        motp=iou_sum / num_matches if num_matches else 0.0,
        mt=100.0 * mt / num_targets if num_targets else 0.0,
        ml=100.0 * ml / num_targets if num_targets else 0.0,
        fp=fp,
        fn=fn,
        ids=ids,
        frag=frag,
        num_gt=num_gt,
        num_targets=num_targets,
        num_matches=num_matches,
    )


def _identity_true_positives(
    gt_totals: Mapping[int, int],
    hyp_totals: Mapping[int, int],
    overlap: Mapping[Tuple[int, int], int],
) -> int:
    """Largest total co-occurrence over one-to-one gt/hyp id pairings."""
    if not gt_totals or not hyp_totals or not overlap:
        return 0
    gt_ids, hyp_ids = sorted(gt_totals), sorted(hyp_totals)
    gt_index = {g: i for i, g in enumerate(gt_ids)}
    hyp_index = {h: j for j, h in enumerate(hyp_ids)}
    counts = np.zeros((len(gt_ids), len(hyp_ids)))
    for (g, h), n in overlap.items():
        counts[gt_index[g], hyp_index[h]] = n
    rows, cols = linear_assignment(-counts)
    return int(round(counts[rows, cols].sum()))


def metrics_table(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """One row per report with the usual benchmark columns."""
    return pd.DataFrame([r.as_row() for r in reports])
