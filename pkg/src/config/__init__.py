from .settings import settings, Settings, normalize_config_keys
from .constants import (
    StrategyName,
    TrackState,
    SortOrder,
    MatchingScheme,
    ExitCode,
    HTA_BASES,
    IGMM_DEFAULTS,
    ASSOCIATION_DEFAULTS,
    TRACK_LIFECYCLE,
    DETECTION_THRESHOLDS,
    MOTION_DEFAULTS,
    METRICS_THRESHOLDS,
    INFEASIBLE_OFFSET,
    MOT_RESULT_COLUMNS,
)

__all__ = [
    "settings",
    "Settings",
    "normalize_config_keys",
    "StrategyName",
    "TrackState",
    "SortOrder",
    "MatchingScheme",
    "ExitCode",
    "HTA_BASES",
    "IGMM_DEFAULTS",
    "ASSOCIATION_DEFAULTS",
    "TRACK_LIFECYCLE",
    "DETECTION_THRESHOLDS",
    "MOTION_DEFAULTS",
    "METRICS_THRESHOLDS",
    "INFEASIBLE_OFFSET",
    "MOT_RESULT_COLUMNS",
]
