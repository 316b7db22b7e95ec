"""Distance terms, hybrid cost, gated cost matrices and assignment."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.appearance import as_feature, cosine_distance, to_model_domain
from src.association import (
    CostMatrix,
    associate,
    build_cost_matrix,
    cascade_match,
    distance_matrix,
    distance_term,
    hybrid_cost,
    linear_assignment,
    record_assignment_distance,
    single_shot_match,
    solve_assignment,
)
from src.config import INFEASIBLE_OFFSET, StrategyName
from src.igmm import IgmmModel
from src.models import BoundingBox, Detection, StrategyConfig
from src.motion import KalmanFilter
from src.tracker import Track
from src.utils import StateError

KF = KalmanFilter()
BOX = BoundingBox(left=100.0, top=100.0, width=40.0, height=100.0)


def make_track(track_id, feature, box=BOX, frame=1) -> Track:
    return Track(track_id, KF.initiate(box), Detection(box=box, feature=feature), frame, n_init=1)


def unit(dim, index):
    return as_feature(np.eye(dim)[index])


def brute_force_minimum(costs: np.ndarray) -> float:
    n, m = costs.shape
    if n <= m:
        perms = np.array(list(itertools.permutations(range(m), n)))
        return float(costs[np.arange(n), perms].sum(axis=1).min())
    perms = np.array(list(itertools.permutations(range(n), m)))
    return float(costs[perms, np.arange(m)].sum(axis=1).min())


# --- Distance terms ---

def test_cms_distance_with_query_in_gallery():
    rng = np.random.default_rng(0)
    f = as_feature(rng.standard_normal(16))
    track = make_track(1, as_feature(rng.standard_normal(16)))
    track.update(KF, Detection(box=BOX, feature=f), 2, eta=0.9)
    assert distance_term(Detection(box=BOX, feature=f), track, StrategyConfig(name=StrategyName.CMS)) == pytest.approx(0.0, abs=1e-12)


def test_knn_with_k1_equals_cms():
    rng = np.random.default_rng(1)
    tracks = []
    for track_id in range(1, 6):
        track = make_track(track_id, as_feature(rng.standard_normal(8)))
        for frame in range(2, 8):
            track.update(KF, Detection(box=BOX, feature=as_feature(rng.standard_normal(8))), frame, eta=0.9)
        tracks.append(track)
    cms = StrategyConfig(name=StrategyName.CMS)
    knn = StrategyConfig(name=StrategyName.KNN, k=1)
    for _ in range(20):
        det = Detection(box=BOX, feature=as_feature(rng.standard_normal(8)))
        for track in tracks:
            assert distance_term(det, track, knn) == distance_term(det, track, cms)


def test_ema_distance_after_single_feature():
    f = as_feature([0.3, 0.4, 0.5])
    track = make_track(1, f)
    assert distance_term(Detection(box=BOX, feature=f), track, StrategyConfig(name=StrategyName.EMA)) == pytest.approx(0.0, abs=1e-12)


def test_missing_smoothed_feature_is_a_state_error():
    track = make_track(1, unit(4, 0))
    track.smoothed_feature = None
    with pytest.raises(StateError):
        distance_term(Detection(box=BOX, feature=unit(4, 0)), track, StrategyConfig(name=StrategyName.EMA))


# --- Hybrid cost ---

def warm_model(values):
    model = IgmmModel()
    for v in values:
        model.observe(v)
    return model


def test_hybrid_cost_with_lambda_one_is_the_distance():
    model = warm_model([0.55, 0.56, 0.6, 0.58])
    for d in (0.0, 0.07, 0.19, 0.6):
        assert hybrid_cost(d, model, 30, 1.0, 15, 0.8) == d


def test_hybrid_cost_waits_for_min_track_length():
    model = warm_model([0.55, 0.56, 0.6, 0.58])
    assert hybrid_cost(0.1, model, 14, 0.5, 15, 0.8) == 0.1
    assert hybrid_cost(0.1, IgmmModel(), 40, 0.5, 15, 0.8) == 0.1


def test_hybrid_cost_at_the_inlier_mean():
    d = 0.09
    model = warm_model([to_model_domain(d)])
    assert hybrid_cost(d, model, 15, 0.0, 15, 0.8) == pytest.approx(0.5)


@given(
    st.floats(min_value=0.0, max_value=2.0),
    st.floats(min_value=0.0, max_value=2.0),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_hybrid_cost_monotone_in_distance(a, b, lam):
    model = warm_model([0.5, 0.52, 0.55, 0.9, 0.51, 0.53])
    lo, hi = min(a, b), max(a, b)
    assert hybrid_cost(lo, model, 20, lam, 15, 0.8) <= hybrid_cost(hi, model, 20, lam, 15, 0.8) + 1e-15


# --- Cost matrix ---

def test_empty_cost_matrix():
    matrix = build_cost_matrix([], [make_track(1, unit(4, 0))], StrategyConfig())
    assert matrix.shape == (0, 1)
    assignment = solve_assignment(matrix)
    assert assignment.matches == [] and assignment.unmatched_tracks == [0]


def test_distance_beyond_dmax_is_gated():
    track = make_track(1, unit(4, 0))
    # cosine distance 0.35 from e0
    feature = as_feature([0.65, np.sqrt(1 - 0.65 ** 2), 0.0, 0.0])
    matrix = build_cost_matrix([Detection(box=BOX, feature=feature)], [track], StrategyConfig(name=StrategyName.EMA))
    assert matrix.raw[0, 0] == pytest.approx(0.35)
    assert matrix.costs[0, 0] == 0.2 + INFEASIBLE_OFFSET
    assert not matrix.feasible_mask()[0, 0]


def test_cost_matrix_matches_per_pair_evaluation():
    rng = np.random.default_rng(21)
    strategy = StrategyConfig(name=StrategyName.HTA, lambda_weight=0.7, min_track_length=5, d_max=2.0)
    tracks = []
    for track_id in range(1, 5):
        track = make_track(track_id, as_feature(rng.standard_normal(8)))
        for _ in range(int(rng.integers(0, 10))):
            record_assignment_distance(track, float(rng.uniform(0.05, 0.3)))
        tracks.append(track)
    detections = [Detection(box=BOX, feature=as_feature(rng.standard_normal(8))) for _ in range(6)]

    matrix = build_cost_matrix(detections, tracks, strategy)
    for i, det in enumerate(detections):
        for j, track in enumerate(tracks):
            d = cosine_distance(det.feature, track.smoothed_feature)
            expected = hybrid_cost(d, track.igmm, track.record_count, 0.7, 5, strategy.upsilon)
            assert matrix.raw[i, j] == pytest.approx(d, abs=1e-12)
            assert matrix.costs[i, j] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "strategy",
    [
        StrategyConfig(name=StrategyName.CMS, d_max=2.0),
        StrategyConfig(name=StrategyName.KNN, k=3, d_max=2.0),
        StrategyConfig(name=StrategyName.EMA, d_max=2.0),
        StrategyConfig(name=StrategyName.HTA, base=StrategyName.CMS, lambda_weight=0.4, min_track_length=3, d_max=2.0),
        StrategyConfig(name=StrategyName.HTA, base=StrategyName.KNN, k=2, lambda_weight=0.6, min_track_length=4, d_max=2.0),
    ],
    ids=lambda strategy: strategy.label,
)
def test_batched_costs_match_per_track_evaluation(strategy):
    rng = np.random.default_rng(8)
    tracks = []
    for track_id in range(1, 8):
        track = make_track(track_id, as_feature(rng.standard_normal(12)))
        # galleries of different lengths so the stacked segments are uneven
        for frame in range(2, 2 + int(rng.integers(0, 9))):
            track.update(KF, Detection(box=BOX, feature=as_feature(rng.standard_normal(12))), frame, eta=0.9)
        for _ in range(int(rng.integers(0, 12))):
            record_assignment_distance(track, float(rng.uniform(0.05, 0.6)))
        tracks.append(track)
    detections = [Detection(box=BOX, feature=as_feature(rng.standard_normal(12))) for _ in range(9)]
    features = np.vstack([det.feature for det in detections])

    raw = distance_matrix(features, tracks, strategy)
    matrix = build_cost_matrix(detections, tracks, strategy)
    for i, det in enumerate(detections):
        for j, track in enumerate(tracks):
            d = distance_term(det, track, strategy)
            assert raw[i, j] == pytest.approx(d, abs=1e-12)
            expected = d
            if strategy.name == StrategyName.HTA:
                expected = hybrid_cost(
                    d, track.igmm, track.record_count, strategy.lambda_weight, strategy.min_track_length, strategy.upsilon
                )
            assert matrix.costs[i, j] == pytest.approx(expected, abs=1e-12)


def test_batched_lambda_one_is_the_raw_matrix():
    rng = np.random.default_rng(4)
    tracks = []
    for track_id in range(1, 4):
        track = make_track(track_id, as_feature(rng.standard_normal(6)))
        for _ in range(6):
            record_assignment_distance(track, float(rng.uniform(0.05, 0.3)))
        tracks.append(track)
    detections = [Detection(box=BOX, feature=as_feature(rng.standard_normal(6))) for _ in range(5)]
    hta = build_cost_matrix(detections, tracks, StrategyConfig(lambda_weight=1.0, min_track_length=1, d_max=2.0))
    ema = build_cost_matrix(detections, tracks, StrategyConfig(name=StrategyName.EMA, d_max=2.0))
    assert hta.costs.tobytes() == ema.costs.tobytes()


def test_motion_gate_blocks_distant_boxes():
    track = make_track(1, unit(4, 0))
    track.predict(KF)
    far = BoundingBox(left=1500.0, top=900.0, width=40.0, height=100.0)
    matrix = build_cost_matrix([Detection(box=far, feature=unit(4, 0))], [track], StrategyConfig(), kf=KF)
    assert matrix.costs[0, 0] == matrix.infeasible


# --- Assignment ---

def test_identity_like_matrix():
    costs = 1.0 - np.eye(3)
    assignment = solve_assignment(CostMatrix(costs=costs, raw=costs, d_max=2.0))
    assert sorted(assignment.matches) == [(0, 0), (1, 1), (2, 2)]
    assert assignment.total_cost == 0.0


def test_single_row_picks_cheapest_column():
    costs = np.array([[0.1, 0.05]])
    assignment = solve_assignment(CostMatrix(costs=costs, raw=costs, d_max=0.2))
    assert assignment.matches == [(0, 1)]
    assert assignment.unmatched_tracks == [0]


def test_solver_is_optimal_against_brute_force():
    rng = np.random.default_rng(1234)
    for n in range(1, 8):
        for m in range(1, 8):
            for _ in range(21):
                raw = rng.uniform(0.0, 0.4, size=(n, m))
                matrix = CostMatrix.from_array(raw, d_max=0.2)
                assignment = solve_assignment(matrix)

                assert assignment.objective == pytest.approx(brute_force_minimum(matrix.costs), rel=1e-12)
                det_ids = [r for r, _ in assignment.matches]
                trk_ids = [c for _, c in assignment.matches]
                assert len(set(det_ids)) == len(det_ids) and len(set(trk_ids)) == len(trk_ids)
                assert all(raw[r, c] <= 0.2 for r, c in assignment.matches)
                assert sorted(det_ids + assignment.unmatched_detections) == list(range(n))
                assert sorted(trk_ids + assignment.unmatched_tracks) == list(range(m))


def test_linear_assignment_drops_infeasible_pairs():
    rows, cols = linear_assignment(np.array([[0.1, 5.0], [5.0, 5.0]]), infeasible=5.0)
    assert rows.tolist() == [0] and cols.tolist() == [0]


def test_cascade_with_one_level_equals_single_shot():
    rng = np.random.default_rng(8)
    tracks = [make_track(j + 1, as_feature(rng.standard_normal(6))) for j in range(5)]
    for track in tracks:
        track.time_since_update = 1
    detections = [Detection(box=BOX, feature=as_feature(t.smoothed_feature + 0.1 * rng.standard_normal(6))) for t in tracks[:4]]
    strategy = StrategyConfig(name=StrategyName.CMS, d_max=0.5)

    cascade = cascade_match(detections, tracks, strategy)
    single = single_shot_match(detections, tracks, strategy)
    assert sorted(cascade.matches) == sorted(single.matches)
    assert cascade.unmatched_tracks == single.unmatched_tracks


def test_cascade_prefers_recently_seen_tracks():
    f = unit(4, 0)
    stale, recent = make_track(1, f), make_track(2, f)
    stale.time_since_update = 5
    recent.time_since_update = 1
    assignment = associate([Detection(box=BOX, feature=f)], [stale, recent], StrategyConfig(name=StrategyName.CMS))
    assert assignment.matches == [(0, 1)]
    assert assignment.unmatched_tracks == [0]


def test_cascade_reports_leftover_detections():
    track = make_track(1, unit(4, 0))
    track.time_since_update = 1
    assignment = cascade_match(
        [Detection(box=BOX, feature=unit(4, 0)), Detection(box=BOX, feature=unit(4, 3))],
        [track],
        StrategyConfig(name=StrategyName.CMS),
    )
    assert assignment.matches == [(0, 0)]
    assert assignment.unmatched_detections == [1]


def test_no_match_exceeds_dmax():
    rng = np.random.default_rng(17)
    for name in StrategyName:
        strategy = StrategyConfig(name=name)
        tracks = [make_track(j + 1, as_feature(rng.standard_normal(4))) for j in range(6)]
        for track in tracks:
            track.time_since_update = 1
        detections = [Detection(box=BOX, feature=as_feature(rng.standard_normal(4))) for _ in range(6)]
        assignment = associate(detections, tracks, strategy)
        assert all(d <= strategy.d_max for d in assignment.match_distances)


# --- Distance records ---

def test_first_record_seeds_the_mixture():
    track = make_track(1, unit(4, 0))
    record_assignment_distance(track, 0.0625)
    assert track.distance_records == [0.5]
    assert len(track.igmm) == 1


def test_hybrid_path_activates_after_min_track_length():
    f = unit(4, 0)
    query = as_feature([0.95, np.sqrt(1 - 0.95 ** 2), 0.0, 0.0])
    track = make_track(1, f)
    strategy = StrategyConfig(name=StrategyName.HTA, lambda_weight=0.5, min_track_length=3)

    for _ in range(2):
        record_assignment_distance(track, 0.05)
    matrix = build_cost_matrix([Detection(box=BOX, feature=query)], [track], strategy)
    assert matrix.costs[0, 0] == matrix.raw[0, 0]

    record_assignment_distance(track, 0.05)
    matrix = build_cost_matrix([Detection(box=BOX, feature=query)], [track], strategy)
    assert matrix.costs[0, 0] != matrix.raw[0, 0]
