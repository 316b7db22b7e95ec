from typing import Optional

from pydantic import BaseModel, Field, field_validator

from src.config import (
    ASSOCIATION_DEFAULTS,
    DETECTION_THRESHOLDS,
    HTA_BASES,
    IGMM_DEFAULTS,
    MOTION_DEFAULTS,
    TRACK_LIFECYCLE,
    MatchingScheme,
    SortOrder,
    StrategyName,
)


class IgmmConfig(BaseModel):
    """Per-track mixture configuration"""
    initial_variance: float = Field(default=IGMM_DEFAULTS["initial_variance"], gt=0)
    max_components: int = Field(default=IGMM_DEFAULTS["max_components"], ge=1)
    min_age: int = Field(default=IGMM_DEFAULTS["min_age"], ge=1)
    min_mass: float = Field(default=IGMM_DEFAULTS["min_mass"], gt=0)
    tau: float = Field(default=IGMM_DEFAULTS["tau"], gt=0, lt=1)
    sort_order: SortOrder = SortOrder.ASCENDING
    variance_floor: float = Field(default=IGMM_DEFAULTS["variance_floor"], gt=0)

    @property
    def update_gate(self) -> float:
        """Squared-Mahalanobis threshold chi2(1 - tau, dof=1)."""
        from src.igmm.stats import chi2_quantile_1dof

        return chi2_quantile_1dof(1.0 - self.tau)


class StrategyConfig(BaseModel):
    """Association strategy and its parameters"""
    name: StrategyName = StrategyName.HTA
    k: int = Field(default=ASSOCIATION_DEFAULTS["k"], ge=1)
    eta: float = Field(default=ASSOCIATION_DEFAULTS["eta"], ge=0.0, le=1.0)
    lambda_weight: float = Field(default=ASSOCIATION_DEFAULTS["lambda_weight"], ge=0.0, le=1.0)
    min_track_length: int = Field(default=ASSOCIATION_DEFAULTS["min_track_length"], ge=1)
    upsilon: float = Field(default=ASSOCIATION_DEFAULTS["upsilon"], ge=0.0, le=1.0)
    base: StrategyName = StrategyName.EMA
    d_max: float = Field(default=ASSOCIATION_DEFAULTS["d_max"], gt=0)
    matching: Optional[MatchingScheme] = None

    @field_validator("base")
    @classmethod
    def _base_is_distance_strategy(cls, value: StrategyName) -> StrategyName:
        if value not in HTA_BASES:
            raise ValueError(f"HTA base must be one of {[b.value for b in HTA_BASES]}, got {value.value}")
        return value

    @property
    def distance_strategy(self) -> StrategyName:
        """Strategy that supplies the raw distance term."""
        return self.base if self.name == StrategyName.HTA else self.name

    @property
    def matching_scheme(self) -> MatchingScheme:
        if self.matching is not None:
            return self.matching
        return MatchingScheme.CASCADE if self.name == StrategyName.CMS else MatchingScheme.SINGLE_SHOT

    @property
    def label(self) -> str:
        if self.name == StrategyName.KNN:
            return f"kNN(k={self.k})"
        if self.name == StrategyName.EMA:
            return f"EMA(eta={self.eta:g})"
        if self.name == StrategyName.HTA:
            return (
                f"HTA(lambda={self.lambda_weight:g}, L={self.min_track_length}, "
                f"upsilon={self.upsilon:g}, base={self.base.value})"
            )
        return "CMS"


class TrackerConfig(BaseModel):
    """Everything the online tracker needs"""
    strategy: StrategyConfig = Field(default_factory=StrategyConfig)
    n_init: int = Field(default=TRACK_LIFECYCLE["n_init"], ge=1)
    max_age: int = Field(default=TRACK_LIFECYCLE["max_age"], ge=1)
    score_threshold: float = Field(default=DETECTION_THRESHOLDS["default"], ge=0.0, le=1.0)
    gallery_budget: int = Field(default=ASSOCIATION_DEFAULTS["gallery_budget"], ge=1)
    motion_gating: bool = True
    gating_threshold: float = Field(default=MOTION_DEFAULTS["gating_threshold"], gt=0)
    igmm: IgmmConfig = Field(default_factory=IgmmConfig)

    def with_strategy(self, **changes) -> "TrackerConfig":
        """Copy with strategy fields replaced (used by comparisons and sweeps)."""
        strategy = StrategyConfig.model_validate({**self.strategy.model_dump(), **changes})
        return self.model_copy(update={"strategy": strategy})
