"""Gated Hungarian assignment and the matching schemes built on it."""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.config import MOTION_DEFAULTS, TRACK_LIFECYCLE, MatchingScheme
from src.models import Detection, StrategyConfig
from src.motion import KalmanFilter
from .cost import CostMatrix, build_cost_matrix

if TYPE_CHECKING:
    from src.tracker.track import Track

logger = logging.getLogger(__name__)


@dataclass
class Assignment:
    matches: List[Tuple[int, int]] = field(default_factory=list)  # (detection, track)
    unmatched_detections: List[int] = field(default_factory=list)
    unmatched_tracks: List[int] = field(default_factory=list)
    match_distances: List[float] = field(default_factory=list)  # raw distance term per match
    objective: float = 0.0  # solver optimum, sentinel entries included
    total_cost: float = 0.0  # feasible matches only

    def __len__(self) -> int:
        return len(self.matches)


def linear_assignment(costs: np.ndarray, infeasible: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Minimum-cost rectangular assignment.

    Pairs whose cost reaches `infeasible` are dropped from the result.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    rows, cols = linear_sum_assignment(costs)
    if infeasible is not None:
        keep = costs[rows, cols] < infeasible
        rows, cols = rows[keep], cols[keep]
    return rows, cols


def solve_assignment(matrix: CostMatrix) -> Assignment:
    n_det, n_trk = matrix.shape
    if n_det == 0 or n_trk == 0:
        return Assignment(unmatched_detections=list(range(n_det)), unmatched_tracks=list(range(n_trk)))

    rows, cols = linear_sum_assignment(matrix.costs)
    objective = float(matrix.costs[rows, cols].sum())

    keep = matrix.costs[rows, cols] < matrix.infeasible
    rows, cols = rows[keep], cols[keep]

    matched_rows, matched_cols = set(rows.tolist()), set(cols.tolist())
    return Assignment(
        matches=[(int(r), int(c)) for r, c in zip(rows, cols)],
        unmatched_detections=[r for r in range(n_det) if r not in matched_rows],
        unmatched_tracks=[c for c in range(n_trk) if c not in matched_cols],
        match_distances=[float(matrix.raw[r, c]) for r, c in zip(rows, cols)],
        objective=objective,
        total_cost=float(matrix.costs[rows, cols].sum()),
    )


def _match_subset(
    detections: Sequence[Detection],
    tracks: Sequence["Track"],
    detection_indices: List[int],
    track_indices: List[int],
    strategy: StrategyConfig,
    kf: Optional[KalmanFilter],
    gating_threshold: float,
) -> Assignment:
    """Solve one level and map the local indices back to the caller's lists."""
    matrix = build_cost_matrix(
        [detections[i] for i in detection_indices],
        [tracks[j] for j in track_indices],
        strategy,
        kf=kf,
        gating_threshold=gating_threshold,
    )
    local = solve_assignment(matrix)
    return Assignment(
        matches=[(detection_indices[r], track_indices[c]) for r, c in local.matches],
        unmatched_detections=[detection_indices[r] for r in local.unmatched_detections],
        unmatched_tracks=[track_indices[c] for c in local.unmatched_tracks],
        match_distances=local.match_distances,
        objective=local.objective,
        total_cost=local.total_cost,
    )


def single_shot_match(
    detections: Sequence[Detection],
    tracks: Sequence["Track"],
    strategy: StrategyConfig,
    kf: Optional[KalmanFilter] = None,
    gating_threshold: float = MOTION_DEFAULTS["gating_threshold"],
) -> Assignment:
    """All detections against all tracks in one assignment."""
    return _match_subset(
        detections,
        tracks,
        list(range(len(detections))),
        list(range(len(tracks))),
        strategy,
        kf,
        gating_threshold,
    )


def cascade_match(
    detections: Sequence[Detection],
    tracks: Sequence["Track"],
    strategy: StrategyConfig,
    max_age: int = TRACK_LIFECYCLE["max_age"],
    kf: Optional[KalmanFilter] = None,
    gating_threshold: float = MOTION_DEFAULTS["gating_threshold"],
) -> Assignment:
    """
    Match confirmed tracks level by level in order of time since update
    (1..max_age), then tentative tracks against whatever detections remain.
    """
    result = Assignment()
    unmatched_detections = list(range(len(detections)))

    confirmed = [j for j, t in enumerate(tracks) if not t.is_tentative()]
    levels = [[j for j in confirmed if tracks[j].time_since_update == 1 + level] for level in range(max_age)]
    levels.append([j for j, t in enumerate(tracks) if t.is_tentative()])

    for track_indices in levels:
        if not unmatched_detections:
            break
        if not track_indices:
            continue
        level = _match_subset(
            detections, tracks, unmatched_detections, track_indices, strategy, kf, gating_threshold
        )
        result.matches += level.matches
        result.match_distances += level.match_distances
        result.objective += level.objective
        result.total_cost += level.total_cost
        unmatched_detections = level.unmatched_detections

    matched_tracks = {j for _, j in result.matches}
    result.unmatched_detections = unmatched_detections
    result.unmatched_tracks = [j for j in range(len(tracks)) if j not in matched_tracks]
    return result


def associate(
    detections: Sequence[Detection],
    tracks: Sequence["Track"],
    strategy: StrategyConfig,
    max_age: int = TRACK_LIFECYCLE["max_age"],
    kf: Optional[KalmanFilter] = None,
    gating_threshold: float = MOTION_DEFAULTS["gating_threshold"],
) -> Assignment:
    """Dispatch to the matching scheme the strategy calls for."""
    if strategy.matching_scheme == MatchingScheme.CASCADE:
        assignment = cascade_match(detections, tracks, strategy, max_age, kf, gating_threshold)
    else:
        assignment = single_shot_match(detections, tracks, strategy, kf, gating_threshold)

    logger.debug(
        f"{strategy.label}: {len(assignment.matches)} matches, "
        f"{len(assignment.unmatched_detections)} unmatched detections, "
        f"{len(assignment.unmatched_tracks)} unmatched tracks"
    )
    return assignment
