"""
Synthetic sequences with known identities.

Targets follow piecewise-linear paths; each identity owns a mean appearance
feature and detections carry noisy copies of it. Occlusion windows hide a
target's detection and may put an occluder box in its place whose feature is
only partly the target's, which is the kind of outlier distance the hybrid
cost is meant to absorb.
"""

import logging
from typing import List, Optional

import numpy as np
import pandas as pd

from src.appearance import as_feature, as_feature_matrix
from src.config import MOT_RESULT_COLUMNS
from src.models import (
    BoundingBox,
    Detection,
    OcclusionWindow,
    SequenceInfo,
    SyntheticSpec,
    TargetSpec,
)
from src.utils import DomainError
from .motchallenge import SequenceBundle

logger = logging.getLogger(__name__)


def orthogonal_means(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """`count` orthonormal unit vectors when dim allows, random unit vectors otherwise."""
    if dim >= count:
        q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
        return q.T.copy()
    return as_feature_matrix(rng.standard_normal((count, dim)))


def correlated_means(rng: np.random.Generator, count: int, dim: int, separation: float) -> np.ndarray:
    """Unit means sharing one common direction so that pairwise cosine distance equals `separation`."""
    if dim < count + 1:
        raise DomainError(f"need feature_dim >= {count + 1} for correlated means")
    if not 0.0 < separation <= 1.0:
        raise DomainError(f"separation must lie in (0, 1], got {separation}")
    basis = orthogonal_means(rng, count + 1, dim)
    common, own = basis[0], basis[1:]
    scale = np.sqrt(1.0 / separation - 1.0)
    return as_feature_matrix(scale * common[None, :] + own)


def _center(target: TargetSpec, frame: int):
    frames = [w[0] for w in target.waypoints]
    return (
        float(np.interp(frame, frames, [w[1] for w in target.waypoints])),
        float(np.interp(frame, frames, [w[2] for w in target.waypoints])),
    )


def _occlusion(windows: List[OcclusionWindow], target: int, frame: int) -> Optional[OcclusionWindow]:
    for window in windows:
        if window.target == target and window.start <= frame <= window.end:
            return window
    return None


def generate_synthetic(spec: SyntheticSpec) -> SequenceBundle:
    """Deterministic for a fixed `spec.seed`."""
    rng = np.random.default_rng(spec.seed)
    dim = spec.feature_dim

    if spec.identity_means is not None:
        means = as_feature_matrix(spec.identity_means, dim)
    else:
        means = orthogonal_means(rng, len(spec.targets), dim)

    detections = {}
    gt_rows = []
    for frame in range(1, spec.frame_count + 1):
        frame_dets: List[Detection] = []

        def emit(left, top, width, height, confidence, feature):
            box = BoundingBox(left=left, top=top, width=width, height=height, confidence=confidence)
            frame_dets.append(Detection(box=box, feature=feature, index=len(frame_dets)))

        for t, target in enumerate(spec.targets):
            if not target.first_frame <= frame <= target.last_frame:
                continue
            cx, cy = _center(target, frame)
            left, top = cx - target.width / 2, cy - target.height / 2
            gt_rows.append((frame, t + 1, left, top, target.width, target.height))

            jitter = rng.normal(0.0, spec.box_noise, size=2) if spec.box_noise > 0 else np.zeros(2)
            window = _occlusion(spec.occlusions, t, frame)
            if window is not None:
                if window.emit_occluder:
                    mix = spec.occluder_feature_mix
                    feature = as_feature(mix * means[t] + (1.0 - mix) * as_feature(rng.standard_normal(dim)))
                    emit(
                        left + jitter[0] + rng.uniform(-4.0, 4.0),
                        top + jitter[1],
                        target.width,
                        target.height,
                        float(rng.uniform(0.4, 0.9)),
                        feature,
                    )
                continue

            if rng.random() < spec.missed_detection_rate:
                continue

            noise = spec.feature_noise if target.feature_noise is None else target.feature_noise
            noisy = means[t] + noise * rng.standard_normal(dim)
            emit(
                left + jitter[0],
                top + jitter[1],
                target.width,
                target.height,
                float(rng.uniform(0.6, 1.0)),
                as_feature(noisy),
            )

        for _ in range(int(rng.binomial(len(spec.targets), spec.false_positive_rate))):
            height = float(rng.uniform(80.0, 120.0))
            width = 0.4 * height
            emit(
                float(rng.uniform(0.0, spec.image_width - width)),
                float(rng.uniform(0.0, spec.image_height - height)),
                width,
                height,
                float(rng.uniform(0.3, 1.0)),
                as_feature(rng.standard_normal(dim)),
            )

        if frame_dets:
            detections[frame] = frame_dets

    ground_truth = pd.DataFrame(gt_rows, columns=MOT_RESULT_COLUMNS)
    info = SequenceInfo(
        name=spec.name,
        frame_rate=spec.frame_rate,
        frame_count=spec.frame_count,
        feature_dim=dim,
    )
    bundle = SequenceBundle(info=info, detections=detections, ground_truth=ground_truth)
    logger.debug(
        f"Generated {spec.name}: {len(spec.targets)} targets, {bundle.detection_count} detections, "
        f"{len(ground_truth)} gt boxes"
    )
    return bundle


def ambiguity_suite_spec(
    seed: int,
    target_count: int = 10,
    frame_count: int = 300,
    feature_dim: int = 32,
    feature_noise: float = 0.07,
    clean_feature_noise: float = 0.02,
    identity_separation: float = 0.01,
    speed: float = 3.0,
    occlusion_length: int = 28,
    emit_occluders: bool = False,
    occluder_feature_mix: float = 0.65,
    false_positive_rate: float = 0.02,
    missed_detection_rate: float = 0.02,
) -> SyntheticSpec:
    """
    Crossing pairs of look-alike identities.

    Both members of a pair share a lane (12 px apart) and a box size and walk
    towards each other at `speed` px/frame, crossing mid-sequence. The first
    member's appearance is noisy (`feature_noise`), the second's steady
    (`clean_feature_noise`), and the steady one is hidden for
    `occlusion_length` frames centred on the crossing. While it is hidden its
    coasting track gates the noisy neighbour's detections, and only the
    appearance term decides whether that track takes them.
    """
    rng = np.random.default_rng(seed)
    pairs = (target_count + 1) // 2
    lane_gap = 900.0 / max(pairs, 1)
    margin = max(1, frame_count // 15)
    spread = frame_count // 10

    targets = []
    occlusions = []
    for pair in range(pairs):
        y = 120.0 + lane_gap * pair
        crossing = frame_count // 2 + int(rng.integers(-spread, spread + 1))
        x_cross = 960.0 + float(rng.uniform(-200.0, 200.0))
        height = float(rng.uniform(80.0, 120.0))

        for member in range(min(2, target_count - 2 * pair)):
            direction = 1.0 if member == 0 else -1.0
            start = 1 + int(rng.integers(0, margin))
            end = frame_count - int(rng.integers(0, margin))
            frames = (start, end) if start < end else (start,)
            waypoints = [(f, x_cross + direction * speed * (f - crossing), y + 12.0 * member) for f in frames]
            targets.append(
                TargetSpec(
                    waypoints=waypoints,
                    width=0.4 * height,
                    height=height,
                    feature_noise=feature_noise if member == 0 else clean_feature_noise,
                )
            )

            if member == 1 and occlusion_length > 0:
                first = max(crossing - occlusion_length // 2, start + 1)
                last = min(first + occlusion_length - 1, end - 1)
                if first <= last:
                    occlusions.append(
                        OcclusionWindow(target=len(targets) - 1, start=first, end=last, emit_occluder=emit_occluders)
                    )

    means = correlated_means(rng, target_count, feature_dim, identity_separation)
    return SyntheticSpec(
        name=f"ambiguity-{seed:02d}",
        frame_count=frame_count,
        feature_dim=feature_dim,
        targets=targets,
        feature_noise=feature_noise,
        occlusions=occlusions,
        false_positive_rate=false_positive_rate,
        missed_detection_rate=missed_detection_rate,
        box_noise=1.0,
        occluder_feature_mix=occluder_feature_mix,
        seed=seed,
        identity_means=means.tolist(),
    )
