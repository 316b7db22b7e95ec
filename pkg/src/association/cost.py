"""
Detection x track cost matrices for the four association strategies.

CMS, kNN and EMA use an appearance distance directly. HTA mixes the distance
of its base strategy with the cumulative probability of that distance under
the track's inlier mixture once the track has enough distance records.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence, Union

import numpy as np

from src.appearance import cosine_distances, knn_mean_distances, min_distances, to_model_domain
from src.config import INFEASIBLE_OFFSET, MOTION_DEFAULTS, StrategyName
from src.igmm import IgmmModel, normal_cdf
from src.models import Detection, StrategyConfig
from src.motion import KalmanFilter
from src.utils import DomainError, StateError

if TYPE_CHECKING:
    from src.tracker.track import Track

ArrayLike = Union[float, np.ndarray]


@dataclass
class CostMatrix:
    """Rows are detections, columns are tracks."""
    costs: np.ndarray
    raw: np.ndarray  # distance term before mixing, same shape
    d_max: float

    @property
    def infeasible(self) -> float:
        return self.d_max + INFEASIBLE_OFFSET

    @property
    def shape(self):
        return self.costs.shape

    def feasible_mask(self) -> np.ndarray:
        return self.costs < self.infeasible

    @classmethod
    def from_array(cls, costs: np.ndarray, d_max: float) -> "CostMatrix":
        """Wrap plain costs, gating entries above d_max."""
        costs = np.asarray(costs, dtype=np.float64)
        if costs.ndim != 2:
            raise DomainError(f"cost matrix must be 2-D, got shape {costs.shape}")
        gated = costs.copy()
        gated[costs > d_max] = d_max + INFEASIBLE_OFFSET
        return cls(costs=gated, raw=costs.copy(), d_max=d_max)


def distance_terms(features: np.ndarray, track: "Track", strategy: StrategyConfig) -> np.ndarray:
    """Raw appearance distance of every feature row to one track."""
    name = strategy.distance_strategy
    if name == StrategyName.CMS:
        return min_distances(features, track.gallery)
    if name == StrategyName.KNN:
        return knn_mean_distances(features, track.gallery, strategy.k)
    if track.smoothed_feature is None:
        raise StateError(f"track {track.track_id} has no smoothed feature")
    return cosine_distances(features, track.smoothed_feature[None, :])[:, 0]


def distance_term(detection: Detection, track: "Track", strategy: StrategyConfig) -> float:
    return float(distance_terms(detection.feature[None, :], track, strategy)[0])


def hybrid_cost(
    d_raw: ArrayLike,
    model: IgmmModel,
    record_count: int,
    lambda_weight: float,
    min_track_length: int,
    upsilon: float,
) -> ArrayLike:
    """lambda * d + (1 - lambda) * F(d^(1/4)) once the track has min_track_length records."""
    d_arr = np.asarray(d_raw, dtype=np.float64)
    if np.any(np.isnan(d_arr)) or np.any(d_arr < 0):
        raise DomainError(f"distance must be non-negative, got {d_raw!r}")

    if record_count < min_track_length or model.is_empty:
        return float(d_arr) if d_arr.ndim == 0 else d_arr.copy()

    inliers = model.select_inlier_components(upsilon)
    probability = model.truncated_cdf(inliers, to_model_domain(d_arr))
    cost = lambda_weight * d_arr + (1.0 - lambda_weight) * np.asarray(probability)
    return float(cost) if cost.ndim == 0 else cost


def distance_matrix(features: np.ndarray, tracks: Sequence["Track"], strategy: StrategyConfig) -> np.ndarray:
    """
    Raw appearance distances of every feature row to every track.

    All reference features are stacked so the similarities come from a single
    matrix product; per-track reductions then run on column segments.
    """
    name = strategy.distance_strategy
    if name == StrategyName.EMA:
        for track in tracks:
            if track.smoothed_feature is None:
                raise StateError(f"track {track.track_id} has no smoothed feature")
        return cosine_distances(features, np.vstack([track.smoothed_feature for track in tracks]))

    for track in tracks:
        if track.gallery.is_empty:
            raise StateError(f"track {track.track_id} has an empty gallery")

    lengths = np.array([len(track.gallery) for track in tracks])
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    distances = cosine_distances(features, np.vstack([track.gallery.matrix for track in tracks]))

    if name == StrategyName.CMS:
        return np.minimum.reduceat(distances, starts, axis=1)

    out = np.empty((len(features), len(tracks)))
    for col, (start, length) in enumerate(zip(starts, lengths)):
        segment = distances[:, start : start + length]
        k_eff = min(strategy.k, length)
        out[:, col] = np.sort(segment, axis=1)[:, :k_eff].mean(axis=1)
    return out


def hybrid_costs(raw: np.ndarray, tracks: Sequence["Track"], strategy: StrategyConfig) -> np.ndarray:
    """
    Column-wise hybrid_cost over a whole (detections x tracks) distance matrix.

    Inlier parameters are read once per track and padded to a common width
    with zero-weight components, so one CDF evaluation covers every column.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if np.any(np.isnan(raw)) or np.any(raw < 0):
        raise DomainError("distances must be non-negative")
    costs = raw.copy()

    active = [
        col
        for col, track in enumerate(tracks)
        if track.record_count >= strategy.min_track_length and not track.igmm.is_empty
    ]
    if not active or raw.shape[0] == 0:
        return costs

    inlier_sets = [tracks[col].igmm.select_inlier_components(strategy.upsilon) for col in active]
    width = max(inliers.size for inliers in inlier_sets)
    weights = np.zeros((len(active), width))
    means = np.zeros((len(active), width))
    sds = np.ones((len(active), width))
    for row, (col, inliers) in enumerate(zip(active, inlier_sets)):
        model = tracks[col].igmm
        weights[row, : inliers.size] = model.weights[inliers]
        means[row, : inliers.size] = model.means[inliers]
        sds[row, : inliers.size] = np.sqrt(model.variances[inliers])

    d_active = raw[:, active]
    z = (to_model_domain(d_active)[..., None] - means) / sds
    probability = np.sum(normal_cdf(z) * weights, axis=-1) / weights.sum(axis=1)

    lam = strategy.lambda_weight
    costs[:, active] = lam * d_active + (1.0 - lam) * probability
    return costs


def build_cost_matrix(
    detections: Sequence[Detection],
    tracks: Sequence["Track"],
    strategy: StrategyConfig,
    kf: Optional[KalmanFilter] = None,
    gating_threshold: float = MOTION_DEFAULTS["gating_threshold"],
) -> CostMatrix:
    """
    Strategy costs with appearance gating on the raw distance and, when a
    Kalman filter is given, Mahalanobis motion gating.
    """
    n_det, n_trk = len(detections), len(tracks)
    if n_det == 0 or n_trk == 0:
        return CostMatrix(costs=np.zeros((n_det, n_trk)), raw=np.zeros((n_det, n_trk)), d_max=strategy.d_max)

    features = np.vstack([det.feature for det in detections])
    raw = distance_matrix(features, tracks, strategy)
    costs = hybrid_costs(raw, tracks, strategy) if strategy.name == StrategyName.HTA else raw.copy()
    matrix = CostMatrix(costs=costs, raw=raw, d_max=strategy.d_max)

    gated = raw > strategy.d_max
    if kf is not None:
        measurements = np.vstack([det.box.to_xyah() for det in detections])
        for col, track in enumerate(tracks):
            gated[:, col] |= kf.gating_distance(track.kalman, measurements) >= gating_threshold
    costs[gated] = matrix.infeasible

    return matrix
