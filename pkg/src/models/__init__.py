from .tracking_data import (
    BoundingBox,
    Detection,
)
from .config_data import (
    IgmmConfig,
    StrategyConfig,
    TrackerConfig,
)
from .report_data import (
    MetricsReport,
    SequenceInfo,
    SequenceRun,
    RunManifest,
    TargetSpec,
    OcclusionWindow,
    SyntheticSpec,
)

__all__ = [
    "BoundingBox",
    "Detection",
    "IgmmConfig",
    "StrategyConfig",
    "TrackerConfig",
    "MetricsReport",
    "SequenceInfo",
    "SequenceRun",
    "RunManifest",
    "TargetSpec",
    "OcclusionWindow",
    "SyntheticSpec",
]
