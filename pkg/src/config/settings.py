import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values
from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .constants import (
    ASSOCIATION_DEFAULTS,
    DETECTION_THRESHOLDS,
    IGMM_DEFAULTS,
    MOTION_DEFAULTS,
    TRACK_LIFECYCLE,
    MatchingScheme,
    SortOrder,
    StrategyName,
)

# Config-file spellings that differ from the field names.
_KEY_ALIASES = {
    "lambda": "lambda_weight",
    "dmax": "d_max",
    "l": "min_track_length",
    "strategy_name": "strategy",
    "budget": "gallery_budget",
    "base": "hta_base",
}


class Settings(BaseSettings):
    """
    Centralized environment-driven configuration.

    Notes:
    - All fields are loaded from `.env` (if present) and environment variables.
    - Field names map to env vars via Pydantic with an `HTA_` prefix
      (e.g. `d_max` -> `HTA_D_MAX`).
    - A plain-text `key=value` config file can be layered on top with
      `Settings.from_sources()`; CLI flags override the file.
    """

    model_config = SettingsConfigDict(
        env_prefix="HTA_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # --- Association strategy ---
    strategy: StrategyName = Field(default=StrategyName.HTA, description="Association strategy")
    k: int = Field(default=ASSOCIATION_DEFAULTS["k"], description="Neighbours averaged by kNN")
    eta: float = Field(default=ASSOCIATION_DEFAULTS["eta"], description="EMA weighting-decrease coefficient")
    lambda_weight: float = Field(default=ASSOCIATION_DEFAULTS["lambda_weight"], description="Hybrid cost distance weight")
    min_track_length: int = Field(default=ASSOCIATION_DEFAULTS["min_track_length"], description="Records before the hybrid cost activates")
    upsilon: float = Field(default=ASSOCIATION_DEFAULTS["upsilon"], description="Inlier weight portion")
    hta_base: StrategyName = Field(default=StrategyName.EMA, description="Distance term under HTA")
    d_max: float = Field(default=ASSOCIATION_DEFAULTS["d_max"], description="Permissible maximum appearance distance")
    gallery_budget: int = Field(default=ASSOCIATION_DEFAULTS["gallery_budget"], description="Stored features per track")
    matching: Optional[MatchingScheme] = Field(default=None, description="Override cascade/single-shot matching")

    # --- Track lifecycle ---
    score_threshold: float = Field(default=DETECTION_THRESHOLDS["default"], description="Detection score threshold")
    n_init: int = Field(default=TRACK_LIFECYCLE["n_init"], description="Matches needed to confirm a track")
    max_age: int = Field(default=TRACK_LIFECYCLE["max_age"], description="Missed frames before deletion")

    # --- Motion ---
    motion_gating: bool = Field(default=True, description="Apply Kalman Mahalanobis gating")
    gating_threshold: float = Field(default=MOTION_DEFAULTS["gating_threshold"], description="Squared Mahalanobis gate")

    # --- IGMM ---
    initial_variance: float = Field(default=IGMM_DEFAULTS["initial_variance"], description="Variance of a new component")
    max_components: int = Field(default=IGMM_DEFAULTS["max_components"], description="Maximum mixture components")
    min_age: int = Field(default=IGMM_DEFAULTS["min_age"], description="Age after which light components are pruned")
    min_mass: float = Field(default=IGMM_DEFAULTS["min_mass"], description="Accumulated posterior a component must reach")
    tau: float = Field(default=IGMM_DEFAULTS["tau"], description="Update-gate tail probability")
    sort_order: SortOrder = Field(default=SortOrder.ASCENDING, description="Component order for inlier selection")

    # --- Runtime ---
    seed: int = Field(default=0, description="Seed for synthetic data")
    log_level: str = Field(default="INFO", description="Logging verbosity")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level: {value}")
        return level

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "Settings":
        """Build settings from a key=value file and explicit overrides (flags win)."""
        from src.utils import InputError

        values: Dict[str, Any] = {}
        if config_file is not None:
            path = Path(config_file)
            if not path.is_file():
                raise InputError(f"Config file not found: {path}")
            file_values = normalize_config_keys(dotenv_values(path))
            values.update({k: v for k, v in file_values.items() if v is not None})

        if overrides:
            values.update({k: v for k, v in normalize_config_keys(overrides).items() if v is not None})

        try:
            return cls(**values)
        except ValidationError as e:
            raise InputError(f"Invalid configuration: {e}") from e

    def to_tracker_config(self):
        """Validated tracker configuration derived from these settings."""
        from src.models import IgmmConfig, StrategyConfig, TrackerConfig
        from src.utils import InputError

        try:
            return TrackerConfig(
                strategy=StrategyConfig(
                    name=self.strategy,
                    k=self.k,
                    eta=self.eta,
                    lambda_weight=self.lambda_weight,
                    min_track_length=self.min_track_length,
                    upsilon=self.upsilon,
                    base=self.hta_base,
                    d_max=self.d_max,
                    matching=self.matching,
                ),
                n_init=self.n_init,
                max_age=self.max_age,
                score_threshold=self.score_threshold,
                gallery_budget=self.gallery_budget,
                motion_gating=self.motion_gating,
                gating_threshold=self.gating_threshold,
                igmm=IgmmConfig(
                    initial_variance=self.initial_variance,
                    max_components=self.max_components,
                    min_age=self.min_age,
                    min_mass=self.min_mass,
                    tau=self.tau,
                    sort_order=self.sort_order,
                ),
            )
        except ValidationError as e:
            raise InputError(f"Invalid tracker configuration: {e}") from e


def normalize_config_keys(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Lower-case keys, treat '-' as '_', and resolve aliases."""
    normalized = {}
    for key, value in raw.items():
        name = key.strip().lower().replace("-", "_")
        if name.startswith("hta_"):
            name = name[len("hta_"):]
        normalized[_KEY_ALIASES.get(name, name)] = value
    return normalized


settings = Settings()
