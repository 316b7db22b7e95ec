"""
MOTChallenge sequence files: det.txt, gt.txt, tracker results, the appearance
feature sidecar and seqinfo.ini.

Layout of a sequence directory:

    <seq>/seqinfo.ini
    <seq>/det/det.txt
    <seq>/det/features.csv
    <seq>/gt/gt.txt          (optional)
"""

import configparser
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.appearance import as_feature_matrix
from src.config import DETECTION_THRESHOLDS, MOT_RESULT_COLUMNS
from src.models import BoundingBox, Detection, SequenceInfo
from src.utils import InputError, ParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DETECTION_COLUMNS = ["frame", "det_index", "left", "top", "width", "height", "confidence"]
FEATURE_HEADER = re.compile(r"^#\s*dim\s*=\s*(\d+)\s*$")

SEQINFO_FILE = "seqinfo.ini"
DET_FILE = Path("det") / "det.txt"
FEATURE_FILE = Path("det") / "features.csv"
GT_FILE = Path("gt") / "gt.txt"


@dataclass
class SequenceBundle:
    """Everything the tracker and evaluator need for one sequence."""
    info: SequenceInfo
    detections: Dict[int, List[Detection]] = field(default_factory=dict)
    ground_truth: Optional[pd.DataFrame] = None

    @property
    def name(self) -> str:
        return self.info.name

    @property
    def detection_count(self) -> int:
        return sum(len(d) for d in self.detections.values())

    def frames(self) -> Iterator[Tuple[int, List[Detection]]]:
        """(frame, detections) for every frame 1..frame_count, empty frames included."""
        for frame in range(1, self.info.frame_count + 1):
            yield frame, self.detections.get(frame, [])


# --- Low-level table parsing ---

def _read_numeric_rows(path: Path, min_fields: int, skiprows: int = 0) -> pd.DataFrame:
    """Numeric rows indexed by 1-based line number; malformed rows raise ParseError."""
    if not path.is_file():
        raise InputError(f"File not found: {path}")
    empty = pd.DataFrame(columns=range(min_fields), dtype=np.float64)
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            skiprows=skiprows,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        return empty
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise ParseError(str(e), path, int(match.group(1)) if match else None) from e

    raw.index = raw.index + 1 + skiprows
    raw = raw.dropna(how="all")
    if raw.empty:
        return empty
    if raw.shape[1] < min_fields:
        raise ParseError(f"expected at least {min_fields} fields", path, int(raw.index[0]))

    numeric = raw.apply(pd.to_numeric, errors="coerce")
    not_numeric = (numeric.isna() & raw.notna()).any(axis=1)
    missing = numeric.iloc[:, :min_fields].isna().any(axis=1)
    bad = not_numeric | missing
    if bad.any():
        line = int(bad[bad].index[0])
        raise ParseError(f"expected at least {min_fields} numeric fields", path, line)
    # exact decimal-to-binary conversion so written floats read back bit for bit
    return raw.astype(np.float64)


def _positive_boxes(table: pd.DataFrame, path: Path) -> pd.DataFrame:
    degenerate = (table["width"] <= 0) | (table["height"] <= 0)
    if degenerate.any():
        logger.warning(f"{path}: dropping {int(degenerate.sum())} row(s) with non-positive size")
        table = table[~degenerate]
    return table


# --- Detections ---

def read_detections(path: PathLike, score_threshold: float = DETECTION_THRESHOLDS["default"]) -> pd.DataFrame:
    """
    Parse det.txt rows frame,id,left,top,width,height,conf[,x,y,z].

    `det_index` is the row's position within its frame before filtering, which
    is how the feature sidecar refers to it. Rows under the threshold are
    dropped; confidences are clipped into [0, 1].
    """
    path = Path(path)
    numeric = _read_numeric_rows(path, 7)
    if numeric.empty:
        return pd.DataFrame(columns=DETECTION_COLUMNS)

    table = pd.DataFrame(
        {
            "frame": numeric[0].astype(np.int64),
            "left": numeric[2],
            "top": numeric[3],
            "width": numeric[4],
            "height": numeric[5],
            "confidence": numeric[6],
        }
    )
    if (table["frame"] < 1).any():
        line = int(table.index[(table["frame"] < 1).to_numpy()][0])
        raise ParseError("frame numbers start at 1", path, line)

    table["det_index"] = table.groupby("frame").cumcount().astype(np.int64)
    table = table[table["confidence"] >= score_threshold]
    table = _positive_boxes(table, path)
    table = table.assign(confidence=table["confidence"].clip(0.0, 1.0))

    table = table.sort_values(["frame", "det_index"], kind="stable")
    return table[DETECTION_COLUMNS].reset_index(drop=True)


def write_detections(table: pd.DataFrame, path: PathLike) -> None:
    """det.txt with frame,-1,left,top,width,height,conf,-1,-1,-1 in det_index order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if table.empty:
        path.write_text("")
        return
    ordered = table.sort_values(["frame", "det_index"], kind="stable")
    out = pd.DataFrame(
        {
            "frame": ordered["frame"].astype(np.int64),
            "id": -1,
            "left": ordered["left"],
            "top": ordered["top"],
            "width": ordered["width"],
            "height": ordered["height"],
            "confidence": ordered["confidence"],
            "x": -1,
            "y": -1,
            "z": -1,
        }
    )
    out.to_csv(path, header=False, index=False)


# --- Ground truth and results ---

def _read_mot_boxes(path: Path) -> Tuple[pd.DataFrame, pd.DataFrame]:
    numeric = _read_numeric_rows(path, 6)
    if numeric.empty:
        return pd.DataFrame(columns=MOT_RESULT_COLUMNS), numeric
    table = pd.DataFrame(
        {
            "frame": numeric[0].astype(np.int64),
            "id": numeric[1].astype(np.int64),
            "left": numeric[2],
            "top": numeric[3],
            "width": numeric[4],
            "height": numeric[5],
        }
    )
    return table, numeric


def read_ground_truth(path: PathLike) -> pd.DataFrame:
    """gt.txt rows that are considered (flag != 0) and pedestrian or unlabelled (class 1 / -1)."""
    path = Path(path)
    table, numeric = _read_mot_boxes(path)
    if table.empty:
        return table
    keep = pd.Series(True, index=table.index)
    if numeric.shape[1] > 6:
        keep &= numeric[6].fillna(1) != 0
    if numeric.shape[1] > 7:
        keep &= numeric[7].fillna(-1).isin([1, -1])
    table = _positive_boxes(table[keep], path)
    return table.sort_values(["frame", "id"], kind="stable").reset_index(drop=True)


def read_results(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    table, _ = _read_mot_boxes(path)
    if table.empty:
        return table
    return table.sort_values(["frame", "id"], kind="stable").reset_index(drop=True)


def write_results(results: pd.DataFrame, path: PathLike) -> None:
    """Tracker output as frame,id,left,top,width,height,1,-1,-1,-1 sorted by frame then id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if results.empty:
        path.write_text("")
        return
    if (results["id"] <= 0).any():
        raise InputError("result ids must be positive")

    ordered = results.sort_values(["frame", "id"], kind="stable")
    out = ordered[MOT_RESULT_COLUMNS].copy()
    out["frame"] = out["frame"].astype(np.int64)
    out["id"] = out["id"].astype(np.int64)
    out["conf"] = 1
    out["x"] = -1
    out["y"] = -1
    out["z"] = -1
    out.to_csv(path, header=False, index=False)
    logger.info(f"Wrote {len(out)} result rows to {path}")


def write_ground_truth(table: pd.DataFrame, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if table.empty:
        path.write_text("")
        return
    out = table.sort_values(["frame", "id"], kind="stable")[MOT_RESULT_COLUMNS].copy()
    out["flag"] = 1
    out["class"] = 1
    out["visibility"] = 1.0
    out.to_csv(path, header=False, index=False)


# --- Feature sidecar ---

def read_features(path: PathLike) -> Tuple[pd.DataFrame, np.ndarray]:
    """
    Parse features.csv: a '# dim=<n>' header, then frame,det_index,v1..vn rows.

    Returns the (frame, det_index) keys and the unit-normalized feature matrix,
    row-aligned.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"Feature file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
    match = FEATURE_HEADER.match(header)
    if match is None:
        raise ParseError("missing '# dim=<n>' header", path, 1)
    dim = int(match.group(1))

    numeric = _read_numeric_rows(path, 2 + dim, skiprows=1)
    if numeric.empty:
        return pd.DataFrame(columns=["frame", "det_index"]), np.empty((0, dim))
    if numeric.shape[1] != 2 + dim:
        raise ParseError(f"expected {2 + dim} fields per row, found {numeric.shape[1]}", path, int(numeric.index[0]))

    keys = pd.DataFrame(
        {"frame": numeric[0].astype(np.int64), "det_index": numeric[1].astype(np.int64)}
    ).reset_index(drop=True)
    if keys.duplicated().any():
        first = int(numeric.index[keys.duplicated().to_numpy()][0])
        raise ParseError("duplicate (frame, det_index) feature row", path, first)

    try:
        features = as_feature_matrix(numeric.iloc[:, 2:].to_numpy(dtype=np.float64), dim)
    except ValueError as e:
        raise ParseError(str(e), path) from e
    return keys, features


def write_features(keys: pd.DataFrame, features: np.ndarray, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    features = np.atleast_2d(features)
    dim = features.shape[1] if features.size else 0
    table = pd.DataFrame(features, columns=[f"v{i}" for i in range(dim)])
    table.insert(0, "det_index", keys["det_index"].to_numpy(dtype=np.int64))
    table.insert(0, "frame", keys["frame"].to_numpy(dtype=np.int64))
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# dim={dim}\n")
        table.to_csv(fh, header=False, index=False, float_format="%.8g")


# --- Sequence metadata ---

def read_seqinfo(path: PathLike) -> SequenceInfo:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"Sequence metadata not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
        section = parser["Sequence"]
        return SequenceInfo(
            name=section.get("name", path.parent.name),
            frame_rate=section.getfloat("frameRate", 30.0),
            frame_count=section.getint("seqLength"),
            feature_dim=section.getint("featureDim"),
        )
    except (configparser.Error, KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: invalid sequence metadata ({e})") from e


def write_seqinfo(info: SequenceInfo, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["Sequence"] = {
        "name": info.name,
        "frameRate": f"{info.frame_rate:g}",
        "seqLength": str(info.frame_count),
        "featureDim": str(info.feature_dim),
    }
    with path.open("w", encoding="utf-8") as fh:
        parser.write(fh)


# --- Whole sequences ---

def load_sequence(
    sequence_dir: PathLike,
    score_threshold: float = DETECTION_THRESHOLDS["default"],
) -> SequenceBundle:
    """Read a sequence directory and attach one feature to every kept detection."""
    sequence_dir = Path(sequence_dir)
    info = read_seqinfo(sequence_dir / SEQINFO_FILE)
    table = read_detections(sequence_dir / DET_FILE, score_threshold)
    keys, features = read_features(sequence_dir / FEATURE_FILE)

    if features.size and features.shape[1] != info.feature_dim:
        raise InputError(
            f"{sequence_dir / FEATURE_FILE}: feature dimension {features.shape[1]} "
            f"does not match featureDim={info.feature_dim}"
        )
    if not table.empty and int(table["frame"].max()) > info.frame_count:
        raise InputError(
            f"{sequence_dir / DET_FILE}: frame {int(table['frame'].max())} exceeds seqLength={info.frame_count}"
        )

    row_of = {(int(f), int(i)): r for r, (f, i) in enumerate(zip(keys["frame"], keys["det_index"]))}
    detections: Dict[int, List[Detection]] = {}
    for row in table.itertuples(index=False):
        key = (int(row.frame), int(row.det_index))
        if key not in row_of:
            raise InputError(f"{sequence_dir / FEATURE_FILE}: no feature for frame {key[0]} detection {key[1]}")
        box = BoundingBox(
            left=float(row.left),
            top=float(row.top),
            width=float(row.width),
            height=float(row.height),
            confidence=float(row.confidence),
        )
        detections.setdefault(key[0], []).append(Detection(box=box, feature=features[row_of[key]], index=key[1]))

    gt_path = sequence_dir / GT_FILE
    ground_truth = read_ground_truth(gt_path) if gt_path.is_file() else None

    bundle = SequenceBundle(info=info, detections=detections, ground_truth=ground_truth)
    logger.info(
        f"Loaded {info.name}: {info.frame_count} frames, {bundle.detection_count} detections"
        f"{'' if ground_truth is None else f', {len(ground_truth)} gt boxes'}"
    )
    return bundle


def save_sequence(bundle: SequenceBundle, output_dir: PathLike) -> Path:
    """Write a bundle as a MOT-style sequence directory; returns the directory."""
    output_dir = Path(output_dir)
    write_seqinfo(bundle.info, output_dir / SEQINFO_FILE)

    rows, feats = [], []
    for frame in sorted(bundle.detections):
        for det in sorted(bundle.detections[frame], key=lambda d: d.index):
            b = det.box
            rows.append((frame, det.index, b.left, b.top, b.width, b.height, b.confidence))
            feats.append(det.feature)
    table = pd.DataFrame(rows, columns=DETECTION_COLUMNS)
    write_detections(table, output_dir / DET_FILE)
    features = np.vstack(feats) if feats else np.empty((0, bundle.info.feature_dim))
    write_features(table[["frame", "det_index"]], features, output_dir / FEATURE_FILE)

    if bundle.ground_truth is not None:
        write_ground_truth(bundle.ground_truth, output_dir / GT_FILE)

    logger.info(f"Saved sequence {bundle.name} to {output_dir}")
    return output_dir
