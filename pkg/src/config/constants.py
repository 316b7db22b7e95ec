from enum import Enum


class StrategyName(str, Enum):
    CMS = "cms"
    KNN = "knn"
    EMA = "ema"
    HTA = "hta"


class TrackState(str, Enum):
    TENTATIVE = "Tentative"
    CONFIRMED = "Confirmed"
    DELETED = "Deleted"


class SortOrder(str, Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


class MatchingScheme(str, Enum):
    CASCADE = "cascade"
    SINGLE_SHOT = "single_shot"


class ExitCode(int, Enum):
    SUCCESS = 0
    INPUT_ERROR = 1
    INVARIANT_VIOLATION = 2


# Strategies whose distance term can feed the hybrid cost.
HTA_BASES = [StrategyName.CMS, StrategyName.KNN, StrategyName.EMA]

IGMM_DEFAULTS = {
    "initial_variance": 0.005,
    "max_components": 5,
    "min_age": 5,
    "min_mass": 3.0,
    "tau": 0.01,
    "variance_floor": 1e-8,
}

ASSOCIATION_DEFAULTS = {
    "d_max": 0.2,
    "k": 5,
    "eta": 0.9,
    "lambda_weight": 0.9,
    "min_track_length": 15,
    "upsilon": 0.8,
    "gallery_budget": 100,
}

TRACK_LIFECYCLE = {
    "n_init": 3,
    "max_age": 30,
}

DETECTION_THRESHOLDS = {
    "default": 0.3,
    # MOT15-style detectors with many false positives
    "noisy_detector": 0.7,
}

MOTION_DEFAULTS = {
    "std_weight_position": 1.0 / 20,
    "std_weight_velocity": 1.0 / 160,
    # 0.95 quantile of chi-square with 4 dof
    "gating_threshold": 9.4877,
}

METRICS_THRESHOLDS = {
    "iou_threshold": 0.5,
    "mostly_tracked": 0.8,
    "mostly_lost": 0.2,
}

# Added to d_max to form the infeasible cost-matrix entry.
INFEASIBLE_OFFSET = 1e5

MOT_RESULT_COLUMNS = ["frame", "id", "left", "top", "width", "height"]
