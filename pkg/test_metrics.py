"""CLEAR-MOT and identity metrics against hand-enumerated sequences."""

import itertools
import logging

import numpy as np
import pandas as pd
import pytest

from src.config import MOT_RESULT_COLUMNS
from src.metrics import FrameAnnotations, evaluate, iou_matrix, match_frame, metrics_table
from src.utils import InputError


def table(rows) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=MOT_RESULT_COLUMNS)


# Two targets, three frames, well apart.
GT = table(
    [
        (1, 1, 100, 100, 40, 100),
        (1, 2, 500, 100, 40, 100),
        (2, 1, 110, 100, 40, 100),
        (2, 2, 490, 100, 40, 100),
        (3, 1, 120, 100, 40, 100),
        (3, 2, 480, 100, 40, 100),
    ]
)


def relabel(df: pd.DataFrame, mapping) -> pd.DataFrame:
    out = df.copy()
    out["id"] = [mapping[(f, i)] if (f, i) in mapping else mapping[i] for f, i in zip(out["frame"], out["id"])]
    return out


# --- IoU and per-frame matching ---

def test_iou_reference_values():
    ious = iou_matrix([[0, 0, 10, 10]], [[0, 0, 10, 10], [5, 0, 10, 10], [20, 20, 5, 5]])
    np.testing.assert_allclose(ious, [[1.0, 50 / 150, 0.0]])


def test_identical_frame_matches_everything():
    frame = FrameAnnotations(ids=[1, 2], boxes=[[0, 0, 10, 20], [50, 0, 10, 20]])
    match = match_frame(frame, frame)
    assert sorted(match.pairs) == [(1, 1), (2, 2)]
    assert match.ious == [1.0, 1.0]


def test_disjoint_frame_matches_nothing():
    gt = FrameAnnotations(ids=[1], boxes=[[0, 0, 10, 10]])
    hyp = FrameAnnotations(ids=[7], boxes=[[100, 100, 10, 10]])
    match = match_frame(gt, hyp)
    assert match.pairs == [] and match.unmatched_gt == [1] and match.unmatched_hyp == [7]


def test_crossed_overlaps_take_the_optimal_pairing():
    gt = FrameAnnotations(ids=[1, 2], boxes=[[0, 0, 10, 10], [4, 0, 10, 10]])
    hyp = FrameAnnotations(ids=[8, 9], boxes=[[3, 0, 10, 10], [1, 0, 10, 10]])
    ious = iou_matrix(gt.boxes, hyp.boxes)
    best = max(itertools.permutations(range(2)), key=lambda p: sum(ious[i, p[i]] for i in range(2) if ious[i, p[i]] >= 0.5))
    expected = sorted((int(gt.ids[i]), int(hyp.ids[best[i]])) for i in range(2))
    assert sorted(match_frame(gt, hyp).pairs) == expected


def test_previous_pair_is_kept_while_above_threshold():
    gt = FrameAnnotations(ids=[1], boxes=[[0, 0, 10, 10]])
    hyp = FrameAnnotations(ids=[5, 6], boxes=[[3, 0, 10, 10], [0, 0, 10, 10]])
    assert match_frame(gt, hyp, previous={1: 5}).pairs == [(1, 5)]
    assert match_frame(gt, hyp).pairs == [(1, 6)]


def test_duplicate_ids_are_rejected():
    with pytest.raises(InputError):
        FrameAnnotations(ids=[3, 3], boxes=[[0, 0, 1, 1], [5, 5, 1, 1]])
    duplicated = pd.concat([GT, GT.iloc[[0]]], ignore_index=True)
    with pytest.raises(InputError):
        evaluate(GT, duplicated)


# --- Sequence metrics ---

def test_perfect_tracker():
    report = evaluate(GT, relabel(GT, {1: 10, 2: 20}))
    assert (report.mota, report.idf1, report.motp) == (1.0, 1.0, 1.0)
    assert (report.ids, report.frag, report.fp, report.fn) == (0, 0, 0, 0)
    assert (report.mt, report.ml) == (100.0, 0.0)


def test_all_miss():
    report = evaluate(GT, table([]))
    assert report.mota == 0.0
    assert report.idf1 == 0.0
    assert report.fn == 6 and report.fp == 0
    assert report.ml == 100.0


def test_single_id_flip():
    hyp = relabel(GT, {1: 10, (1, 2): 20, (2, 2): 30, (3, 2): 30})
    report = evaluate(GT, hyp)
    assert report.ids == 1
    assert report.frag == 0
    # identity matching: 1 <-> 10 (3 frames), 2 <-> 30 (2 frames)
    assert report.idf1 == pytest.approx(10 / 12)
    assert report.mota == pytest.approx(5 / 6)


def test_fragmentation_counts_tracked_to_untracked():
    gt = table([(f, 1, 100, 100, 40, 100) for f in range(1, 6)])
    hyp = gt[gt["frame"] != 3].assign(id=4)
    report = evaluate(gt, hyp)
    assert report.frag == 1
    assert report.ids == 0
    assert report.mt == 100.0  # 4 of 5 frames


def test_mostly_lost_boundary():
    gt = table([(f, 1, 100, 100, 40, 100) for f in range(1, 6)])
    report = evaluate(gt, gt[gt["frame"] == 1])
    assert report.ml == 100.0 and report.mt == 0.0


def test_metrics_invariant_to_id_renaming():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b = rng.choice(1000, size=2, replace=False)
        report = evaluate(GT, relabel(GT, {1: int(a) + 1, 2: int(b) + 1}))
        assert report.idf1 == 1.0 and report.ids == 0


def test_dropping_a_true_positive():
    base = evaluate(GT, GT)
    report = evaluate(GT, GT.drop(index=2))
    assert report.fn == base.fn + 1
    assert report.idf1 <= base.idf1


def test_motp_is_mean_matched_iou():
    hyp = GT.copy()
    hyp["left"] = hyp["left"] + np.array([0, 2, 4, 0, 1, 3])
    report = evaluate(GT, hyp)
    ious = [
        iou_matrix(GT.iloc[[k]][["left", "top", "width", "height"]].to_numpy(), hyp.iloc[[k]][["left", "top", "width", "height"]].to_numpy())[0, 0]
        for k in range(len(GT))
    ]
    assert report.motp == pytest.approx(np.mean(ious), abs=1e-12)


def test_empty_ground_truth_warns(caplog):
    with caplog.at_level(logging.WARNING):
        report = evaluate(table([]), table([]), name="blank")
    assert report.mota == 0.0
    assert "ground truth is empty" in caplog.text


def test_metrics_table_rows():
    frame = metrics_table([evaluate(GT, GT, name="gt-vs-gt")])
    assert frame.loc[0, "name"] == "gt-vs-gt"
    assert frame.loc[0, "IDF1"] == 100.0
    assert list(frame.columns) == ["name", "IDF1", "MOTA", "MOTP", "MT", "ML", "FP", "FN", "IDS", "Frag"]
