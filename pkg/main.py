"""
Command-line driver for the tracker.

    python main.py track <seq_dir>... --strategy hta --out output/
    python main.py eval --gt <seq_dir|gt.txt> <result.txt>...
    python main.py compare [<seq_dir>] --strategies cms,knn,ema,hta
    python main.py generate --out data/
    python main.py inspect output/manifest.json --track-id 3
    python main.py sweep --parameter min_track_length --values 5,10,15,30,60,100
    python main.py benchmark

Exit status: 0 on success, 1 for bad input, 2 for an internal invariant violation.
"""

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from src.config import ExitCode, Settings, StrategyName
from src.data_ingestion import (
    ambiguity_suite_spec,
    generate_synthetic,
    load_sequence,
    read_ground_truth,
    read_results,
    save_sequence,
    write_results,
)
from src.experiments import (
    ambiguity_comparison,
    benchmark_association,
    compare_strategies,
    run_tracker,
    strategy_configs,
    sweep,
)
from src.igmm import IgmmModel
from src.metrics import evaluate, metrics_table
from src.models import RunManifest, SequenceRun
from src.utils import (
    DomainError,
    InputError,
    StateError,
    components_frame,
    density_frame,
    histogram_frame,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


# --- Argument parsing ---

def _add_tracker_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("tracker")
    group.add_argument("--strategy", choices=[s.value for s in StrategyName], default=None)
    group.add_argument("--lambda", dest="lambda_weight", type=float, default=None)
    group.add_argument("--min-track-length", dest="min_track_length", type=int, default=None)
    group.add_argument("--upsilon", type=float, default=None)
    group.add_argument("--k", type=int, default=None)
    group.add_argument("--eta", type=float, default=None)
    group.add_argument("--dmax", dest="d_max", type=float, default=None)
    group.add_argument("--base", dest="hta_base", choices=["cms", "knn", "ema"], default=None)
    group.add_argument("--matching", choices=["cascade", "single_shot"], default=None)
    group.add_argument("--gallery-budget", dest="gallery_budget", type=int, default=None)
    group.add_argument("--score-threshold", dest="score_threshold", type=float, default=None)
    group.add_argument("--n-init", dest="n_init", type=int, default=None)
    group.add_argument("--max-age", dest="max_age", type=int, default=None)
    group.add_argument(
        "--no-motion-gating", dest="motion_gating", action="store_const", const=False, default=None
    )


def _add_suite_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("synthetic suite")
    group.add_argument("--targets", type=int, default=10)
    group.add_argument("--frames", type=int, default=300)


def _suite_size(args: argparse.Namespace) -> Dict[str, int]:
    return {"target_count": args.targets, "frame_count": args.frames}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value config file (flags override it)")
    common.add_argument("--out", default="output", help="Output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--log-level", dest="log_level", default=None)
    _add_tracker_flags(common)

    parser = argparse.ArgumentParser(description="Hybrid track association for online multi-object tracking")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", parents=[common], help="Run the tracker over sequence directories")
    p.add_argument("sequences", nargs="+")

    p = sub.add_parser("eval", parents=[common], help="Score result files against ground truth")
    p.add_argument("--gt", required=True, help="Sequence directory or gt.txt")
    p.add_argument("results", nargs="+")

    p = sub.add_parser("compare", parents=[common], help="Compare strategies on one sequence or the synthetic suite")
    p.add_argument("sequence", nargs="?", default=None)
    p.add_argument("--strategies", default="cms,knn,ema,hta")
    p.add_argument("--seeds", type=int, default=20, help="Synthetic seeds when no sequence is given")
    _add_suite_flags(p)

    p = sub.add_parser("generate", parents=[common], help="Write a synthetic sequence")
    p.add_argument("--targets", type=int, default=10)
    p.add_argument("--frames", type=int, default=300)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--feature-noise", dest="feature_noise", type=float, default=0.07, help="Noise of the first target of each pair")
    p.add_argument("--clean-noise", dest="clean_noise", type=float, default=0.02, help="Noise of the occluded target of each pair")
    p.add_argument("--separation", type=float, default=0.01, help="Cosine distance between identity means")
    p.add_argument("--occluders", action="store_true", help="Emit occluder boxes while a target is hidden")

    p = sub.add_parser("inspect", parents=[common], help="Plot data for one track's distance records")
    p.add_argument("manifest")
    p.add_argument("--track-id", dest="track_id", type=int, required=True)
    p.add_argument("--sequence", default=None, help="Sequence name when the run holds several")
    p.add_argument("--bins", type=int, default=30)

    p = sub.add_parser("sweep", parents=[common], help="IDF1 against one strategy parameter")
    p.add_argument("--parameter", required=True)
    p.add_argument("--values", required=True, help="Comma-separated values")
    p.add_argument("--seeds", type=int, default=20)
    _add_suite_flags(p)

    p = sub.add_parser("benchmark", parents=[common], help="Time one association step")
    p.add_argument("--detections", type=int, default=100)
    p.add_argument("--tracks", type=int, default=100)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--gallery", type=int, default=100)
    p.add_argument("--repeats", type=int, default=5)

    return parser


def load_settings(args: argparse.Namespace) -> Settings:
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "strategy",
            "lambda_weight",
            "min_track_length",
            "upsilon",
            "k",
            "eta",
            "d_max",
            "hta_base",
            "matching",
            "gallery_budget",
            "score_threshold",
            "n_init",
            "max_age",
            "motion_gating",
            "seed",
            "log_level",
        )
    }
    return Settings.from_sources(config_file=args.config, overrides=overrides)


# --- Commands ---

def cmd_track(args: argparse.Namespace, settings: Settings) -> int:
    config = settings.to_tracker_config()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    runs: List[SequenceRun] = []
    for sequence_dir in args.sequences:
        start = time.perf_counter()
        bundle = load_sequence(sequence_dir, settings.score_threshold)
        run = run_tracker(bundle, config)
        result_path = out_dir / f"{bundle.name}.txt"
        write_results(run.results, result_path)
        elapsed = time.perf_counter() - start

        records_path = out_dir / f"{bundle.name}_tracks.json"
        records = {"sequence": bundle.name, "strategy": config.strategy.label, "tracks": run.track_records}
        records_path.write_text(json.dumps(records, indent=2))

        fps = bundle.info.frame_count / elapsed if elapsed > 0 else float("inf")
        runs.append(
            SequenceRun(
                name=bundle.name,
                sequence_dir=str(Path(sequence_dir).resolve()),
                frames=bundle.info.frame_count,
                detections=bundle.detection_count,
                tracks=run.status["next_id"] - 1,
                elapsed_seconds=elapsed,
                fps=fps,
                result_path=str(result_path),
                track_records_path=str(records_path),
            )
        )
        logger.info(f"{bundle.name}: {fps:.1f} FPS including ingestion")

    manifest = RunManifest(
        created_at=datetime.now(timezone.utc),
        config=settings.model_dump(mode="json"),
        sequences=runs,
        output_dir=str(out_dir),
    )
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(manifest.model_dump_json(indent=2))
    logger.info(f"Manifest written to {manifest_path}")
    return ExitCode.SUCCESS


def _gt_path(value: str) -> Path:
    path = Path(value)
    return path / "gt" / "gt.txt" if path.is_dir() else path


def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    gt = read_ground_truth(_gt_path(args.gt))
    last_gt_frame = int(gt["frame"].max()) if not gt.empty else 0

    reports = []
    for result_file in args.results:
        results = read_results(result_file)
        if not results.empty and int(results["frame"].max()) > last_gt_frame:
            raise InputError(
                f"{result_file}: frame {int(results['frame'].max())} is beyond the ground truth (last frame {last_gt_frame})"
            )
        reports.append(evaluate(gt, results, name=Path(result_file).name))

    print(metrics_table(reports).to_string(index=False))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "metrics.json"
    report_path.write_text(json.dumps([r.model_dump() for r in reports], indent=2))
    logger.info(f"Metrics report written to {report_path}")
    return ExitCode.SUCCESS


def _parse_strategies(value: str) -> List[StrategyName]:
    try:
        return [StrategyName(name.strip().lower()) for name in value.split(",") if name.strip()]
    except ValueError as e:
        raise InputError(f"unknown strategy in {value!r}") from e


def cmd_compare(args: argparse.Namespace, settings: Settings) -> int:
    configs = strategy_configs(settings.to_tracker_config(), _parse_strategies(args.strategies))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.sequence is not None:
        bundle = load_sequence(args.sequence, settings.score_threshold)
        table = compare_strategies(bundle, configs)
        print(table.to_string(index=False))
        table.to_csv(out_dir / f"{bundle.name}_comparison.csv", index=False)
        return ExitCode.SUCCESS

    seeds = list(range(settings.seed, settings.seed + args.seeds))
    per_seed = ambiguity_comparison(seeds, configs, **_suite_size(args))
    summary = per_seed.groupby("strategy", sort=False)[["IDF1", "MOTA", "IDS"]].mean().reset_index()
    print(per_seed.pivot(index="seed", columns="strategy", values="IDF1").round(4).to_string())
    print()
    print(summary.round(4).to_string(index=False))

    means = dict(zip(summary["strategy"], summary["IDF1"]))
    hta = [label for label in means if label.startswith("HTA")]
    ema = [label for label in means if label.startswith("EMA")]
    if hta and ema:
        logger.info(f"mean IDF1 {hta[0]}={means[hta[0]]:.4f} vs {ema[0]}={means[ema[0]]:.4f}")

    per_seed.to_csv(out_dir / "ambiguity_per_seed.csv", index=False)
    summary.to_csv(out_dir / "ambiguity_summary.csv", index=False)
    return ExitCode.SUCCESS


def cmd_generate(args: argparse.Namespace, settings: Settings) -> int:
    spec = ambiguity_suite_spec(
        settings.seed,
        target_count=args.targets,
        frame_count=args.frames,
        feature_dim=args.dim,
        feature_noise=args.feature_noise,
        clean_feature_noise=args.clean_noise,
        identity_separation=args.separation,
        emit_occluders=args.occluders,
    )
    bundle = generate_synthetic(spec)
    path = save_sequence(bundle, Path(args.out) / bundle.name)
    print(path)
    return ExitCode.SUCCESS


def _load_track_records(manifest_path: Path, sequence: Optional[str]) -> Dict[str, Any]:
    if not manifest_path.is_file():
        raise InputError(f"Manifest not found: {manifest_path}")
    manifest = RunManifest.model_validate_json(manifest_path.read_text())
    candidates = [s for s in manifest.sequences if sequence is None or s.name == sequence]
    if not candidates:
        raise InputError(f"{manifest_path}: no sequence named {sequence!r}")
    if len(candidates) > 1:
        raise InputError(f"{manifest_path}: several sequences, pick one with --sequence")
    records_path = Path(candidates[0].track_records_path)
    if not records_path.is_file():
        raise InputError(f"Track records not found: {records_path}")
    return json.loads(records_path.read_text())


def cmd_inspect(args: argparse.Namespace, settings: Settings) -> int:
    records = _load_track_records(Path(args.manifest), args.sequence)
    track = next((t for t in records["tracks"] if t["track_id"] == args.track_id), None)
    if track is None:
        raise InputError(f"unknown track id {args.track_id} in sequence {records['sequence']}")

    model = IgmmModel.from_dict(track["igmm"])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{records['sequence']}_track{args.track_id}"

    histogram_frame(track["distance_records"], bins=args.bins).to_csv(out_dir / f"{stem}_histogram.csv", index=False)
    density_frame(model, settings.upsilon).to_csv(out_dir / f"{stem}_density.csv", index=False)
    components_frame(model, settings.upsilon).to_csv(out_dir / f"{stem}_components.csv", index=False)

    print(json.dumps({"track_id": args.track_id, "records": len(track["distance_records"]), **model.get_status()}, indent=2))
    return ExitCode.SUCCESS


def _parse_values(parameter: str, raw: str) -> List[Any]:
    cast = int if parameter in ("min_track_length", "k") else float
    try:
        return [cast(v) for v in raw.split(",") if v.strip()]
    except ValueError as e:
        raise InputError(f"cannot parse {raw!r} as values of {parameter}") from e


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    parameter = {"lambda": "lambda_weight", "l": "min_track_length", "dmax": "d_max"}.get(
        args.parameter.lower().replace("-", "_"), args.parameter.lower().replace("-", "_")
    )
    values = _parse_values(parameter, args.values)
    seeds = list(range(settings.seed, settings.seed + args.seeds))

    table = sweep(parameter, values, seeds, settings.to_tracker_config(), **_suite_size(args))
    print(table.to_string(index=False))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_dir / f"sweep_{parameter}.csv", index=False)
    return ExitCode.SUCCESS


def cmd_benchmark(args: argparse.Namespace, settings: Settings) -> int:
    base = settings.to_tracker_config()
    rows = [
        benchmark_association(
            args.detections,
            args.tracks,
            args.dim,
            args.gallery,
            strategy=config.strategy,
            repeats=args.repeats,
            seed=settings.seed,
        )
        for config in strategy_configs(base, [StrategyName.EMA, StrategyName.HTA])
    ]
    table = pd.DataFrame(rows)
    print(table.to_string(index=False))
    ema_ms, hta_ms = rows[0]["mean_ms"], rows[1]["mean_ms"]
    logger.info(f"HTA overhead over EMA: {100 * (hta_ms - ema_ms) / ema_ms:.1f}%")
    return ExitCode.SUCCESS


COMMANDS = {
    "track": cmd_track,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "generate": cmd_generate,
    "inspect": cmd_inspect,
    "sweep": cmd_sweep,
    "benchmark": cmd_benchmark,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        settings = load_settings(args)
        logging.basicConfig(level=settings.log_level.upper(), format=LOG_FORMAT)
        return int(COMMANDS[args.command](args, settings))
    except StateError as e:
        logger.error(f"Internal invariant violated: {e}")
        return int(ExitCode.INVARIANT_VIOLATION)
    except (InputError, DomainError, ValidationError) as e:
        logger.error(str(e))
        return int(ExitCode.INPUT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
