from .runner import (
    TrackerRun,
    run_tracker,
    strategy_configs,
    compare_strategies,
    ambiguity_comparison,
    sweep,
    benchmark_association,
)

__all__ = [
    "TrackerRun",
    "run_tracker",
    "strategy_configs",
    "compare_strategies",
    "ambiguity_comparison",
    "sweep",
    "benchmark_association",
]
