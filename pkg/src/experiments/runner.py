"""
Strategy comparisons, parameter sweeps and association timing.

These are the experiment drivers behind the `compare`, `sweep` and
`benchmark` commands; they return pandas frames so the CLI can print or save
them as-is.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.appearance import as_feature
from src.association import build_cost_matrix, record_assignment_distance, solve_assignment
from src.config import StrategyName
from src.data_ingestion import SequenceBundle, ambiguity_suite_spec, generate_synthetic
from src.metrics import evaluate
from src.models import BoundingBox, Detection, StrategyConfig, TrackerConfig
from src.motion import KalmanFilter
from src.tracker import MultiObjectTracker, Track
from src.utils import InputError

logger = logging.getLogger(__name__)


@dataclass
class TrackerRun:
    """Outcome of one tracker pass over one sequence"""
    name: str
    config: TrackerConfig
    results: pd.DataFrame
    frames: int
    elapsed_seconds: float
    track_records: List[Dict[str, Any]] = field(default_factory=list)
    status: Dict[str, Any] = field(default_factory=dict)

    @property
    def fps(self) -> float:
        return self.frames / self.elapsed_seconds if self.elapsed_seconds > 0 else float("inf")


def run_tracker(bundle: SequenceBundle, config: TrackerConfig) -> TrackerRun:
    tracker = MultiObjectTracker(config)
    start = time.perf_counter()
    results = tracker.run_sequence(bundle.frames())
    elapsed = time.perf_counter() - start

    run = TrackerRun(
        name=bundle.name,
        config=config,
        results=results,
        frames=bundle.info.frame_count,
        elapsed_seconds=elapsed,
        track_records=tracker.export_track_records(),
        status=tracker.get_status(),
    )
    logger.info(
        f"{bundle.name} [{config.strategy.label}]: {len(results)} result rows, "
        f"{run.status['next_id'] - 1} tracks, {run.fps:.1f} FPS"
    )
    return run


def strategy_configs(base: TrackerConfig, names: Sequence[StrategyName]) -> List[TrackerConfig]:
    """One config per strategy, all other parameters shared."""
    return [base.with_strategy(name=StrategyName(name)) for name in names]


def compare_strategies(bundle: SequenceBundle, configs: Sequence[TrackerConfig]) -> pd.DataFrame:
    """Metrics row (plus FPS) per config on one sequence with ground truth."""
    if bundle.ground_truth is None:
        raise InputError(f"sequence {bundle.name} has no ground truth to compare against")

    rows = []
    for config in configs:
        run = run_tracker(bundle, config)
        report = evaluate(bundle.ground_truth, run.results, name=config.strategy.label)
        row = report.as_row()
        row["FPS"] = round(run.fps, 1)
        rows.append(row)
    return pd.DataFrame(rows)


def ambiguity_comparison(
    seeds: Sequence[int],
    configs: Sequence[TrackerConfig],
    **suite_kwargs,
) -> pd.DataFrame:
    """Per-seed IDF1 / MOTA / IDS of every config on the ambiguity suite."""
    rows = []
    for seed in seeds:
        bundle = generate_synthetic(ambiguity_suite_spec(seed, **suite_kwargs))
        for config in configs:
            run = run_tracker(bundle, config)
            report = evaluate(bundle.ground_truth, run.results, name=config.strategy.label)
            rows.append(
                {
                    "seed": seed,
                    "strategy": config.strategy.label,
                    "IDF1": report.idf1,
                    "MOTA": report.mota,
                    "IDS": report.ids,
                }
            )
    return pd.DataFrame(rows)


def sweep(
    parameter: str,
    values: Sequence[Any],
    seeds: Sequence[int],
    base_config: TrackerConfig,
    **suite_kwargs,
) -> pd.DataFrame:
    """Mean and spread of IDF1 over the ambiguity suite for each value of one strategy parameter."""
    if parameter not in StrategyConfig.model_fields:
        raise InputError(f"unknown strategy parameter: {parameter}")

    bundles = [generate_synthetic(ambiguity_suite_spec(seed, **suite_kwargs)) for seed in seeds]
    rows = []
    for value in values:
        config = base_config.with_strategy(**{parameter: value})
        scores = [evaluate(b.ground_truth, run_tracker(b, config).results).idf1 for b in bundles]
        rows.append(
            {
                "parameter": parameter,
                "value": value,
                "mean_idf1": float(np.mean(scores)),
                "std_idf1": float(np.std(scores)),
                "seeds": len(scores),
            }
        )
        logger.info(f"sweep {parameter}={value}: mean IDF1 {rows[-1]['mean_idf1']:.4f}")
    return pd.DataFrame(rows)


def _random_box(rng: np.random.Generator) -> BoundingBox:
    height = float(rng.uniform(80.0, 120.0))
    return BoundingBox(
        left=float(rng.uniform(0.0, 1800.0)),
        top=float(rng.uniform(0.0, 950.0)),
        width=0.4 * height,
        height=height,
        confidence=1.0,
    )


def benchmark_association(
    n_detections: int = 100,
    n_tracks: int = 100,
    dim: int = 512,
    gallery_size: int = 100,
    strategy: Optional[StrategyConfig] = None,
    repeats: int = 5,
    seed: int = 0,
) -> Dict[str, Any]:
    """Wall-clock time of one cost matrix plus assignment, averaged over `repeats`."""
    strategy = strategy or StrategyConfig()
    rng = np.random.default_rng(seed)
    kf = KalmanFilter()

    tracks = []
    for track_id in range(1, n_tracks + 1):
        mean = rng.standard_normal(dim)
        first = Detection(box=_random_box(rng), feature=as_feature(mean + 0.3 * rng.standard_normal(dim)))
        track = Track(track_id, kf.initiate(first.box), first, frame=1, n_init=1, gallery_budget=gallery_size)
        for frame in range(2, gallery_size + 1):
            det = Detection(box=first.box, feature=as_feature(mean + 0.3 * rng.standard_normal(dim)))
            track.update(kf, det, frame, strategy.eta)
            record_assignment_distance(track, float(rng.uniform(0.05, 0.15)))
        track.predict(kf)
        tracks.append(track)

    detections = [
        Detection(box=_random_box(rng), feature=as_feature(rng.standard_normal(dim))) for _ in range(n_detections)
    ]

    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        solve_assignment(build_cost_matrix(detections, tracks, strategy, kf=kf))
        timings.append((time.perf_counter() - start) * 1000)

    result = {
        "strategy": strategy.label,
        "detections": n_detections,
        "tracks": n_tracks,
        "dim": dim,
        "gallery_size": gallery_size,
        "mean_ms": float(np.mean(timings)),
        "max_ms": float(np.max(timings)),
    }
    logger.info(f"benchmark {strategy.label}: {result['mean_ms']:.2f}ms mean over {repeats} runs")
    return result
