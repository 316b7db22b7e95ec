"""
Incremental univariate Gaussian mixture over a track's appearance-distance stream.

Each new distance either updates the existing components (when it falls inside
the chi-square gate of at least one of them) or creates a new component. Light
components that never gather posterior mass are pruned afterwards.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from src.config import SortOrder
from src.models import IgmmConfig
from src.utils import ContractViolation, DomainError, StateError
from .stats import gaussian_pdf, normal_cdf

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Component:
    """One mixture component"""
    weight: float  # pi
    mean: float  # mu, model-domain distance
    variance: float  # sigma^2
    mass: float  # N, accumulated posterior
    age: int  # v, observations since creation


class IgmmModel:
    """
    Incremental Gaussian mixture for one track.

    Component parameters live in parallel numpy buffers of length
    `max_components`; the first `len(self)` slots are active and the public
    `weights`, `means`, `variances`, `mass` and `age` arrays are views onto
    them. Operations mutate the model and return it.
    """

    def __init__(self, config: Optional[IgmmConfig] = None):
        self.config = config or IgmmConfig()
        self._gate = self.config.update_gate
        self._floor = self.config.variance_floor

        capacity = self.config.max_components
        self._weights = np.zeros(capacity, dtype=np.float64)
        self._means = np.zeros(capacity, dtype=np.float64)
        self._variances = np.ones(capacity, dtype=np.float64)
        self._mass = np.zeros(capacity, dtype=np.float64)
        self._age = np.zeros(capacity, dtype=np.int64)
        self._count = 0

        self.observation_count = 0

    # --- Introspection ---
    def __len__(self) -> int:
        return self._count

    @property
    def is_empty(self) -> bool:
        return self._count == 0

    @property
    def weights(self) -> np.ndarray:
        return self._weights[: self._count]

    @property
    def means(self) -> np.ndarray:
        return self._means[: self._count]

    @property
    def variances(self) -> np.ndarray:
        return self._variances[: self._count]

    @property
    def mass(self) -> np.ndarray:
        return self._mass[: self._count]

    @property
    def age(self) -> np.ndarray:
        return self._age[: self._count]

    def set_components(
        self,
        weights: Sequence[float],
        means: Sequence[float],
        variances: Sequence[float],
        mass: Optional[Sequence[float]] = None,
        age: Optional[Sequence[int]] = None,
    ) -> "IgmmModel":
        """Replace every component at once; mass and age default to 1."""
        means = np.asarray(means, dtype=np.float64).ravel()
        k = means.size
        weights = np.asarray(weights, dtype=np.float64).ravel()
        variances = np.asarray(variances, dtype=np.float64).ravel()
        mass = np.ones(k) if mass is None else np.asarray(mass, dtype=np.float64).ravel()
        age = np.ones(k, dtype=np.int64) if age is None else np.asarray(age, dtype=np.int64).ravel()

        if any(arr.size != k for arr in (weights, variances, mass, age)):
            raise DomainError("component arrays must have equal length")
        if k > self.config.max_components:
            raise DomainError(f"{k} components exceed max_components={self.config.max_components}")
        if np.any(variances <= 0):
            raise DomainError("component variances must be positive")

        self._weights[:k] = weights
        self._means[:k] = means
        self._variances[:k] = variances
        self._mass[:k] = mass
        self._age[:k] = age
        self._count = k
        return self

    @property
    def update_gate(self) -> float:
        return self._gate

    @property
    def components(self) -> List[Component]:
        return [
            Component(
                weight=float(w),
                mean=float(m),
                variance=float(v),
                mass=float(n),
                age=int(a),
            )
            for w, m, v, n, a in zip(self.weights, self.means, self.variances, self.mass, self.age)
        ]

    def dominant_component(self) -> Component:
        if self.is_empty:
            raise StateError("Mixture has no components")
        return self.components[int(np.argmax(self.weights))]

    def squared_mahalanobis(self, d: float) -> np.ndarray:
        diff = d - self.means
        return diff * diff / self.variances

    def accepts_update(self, d: float) -> bool:
        """True when d lies inside the update gate of at least one component."""
        if self._count == 0:
            return False
        return bool(self.squared_mahalanobis(d).min() < self._gate)

    # --- Procedures ---
    def posterior(self, d: float) -> np.ndarray:
        """Responsibilities of every component for d."""
        if self._count == 0:
            raise StateError("Posterior requested from an empty mixture")
        _require_finite(d)
        return self._responsibilities(d)

    def create_component(self, d: float) -> "IgmmModel":
        _require_finite(d)
        self._create(d)
        return self

    def update_components(self, d: float) -> "IgmmModel":
        _require_finite(d)
        if not self.accepts_update(d):
            raise ContractViolation(
                f"d={d:.6f} is outside the update gate {self._gate:.4f} of every component"
            )
        self._update(d)
        return self

    def remove_spurious(self) -> "IgmmModel":
        spurious = (self.age > self.config.min_age) & (self.mass < self.config.min_mass)
        if spurious.any():
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"Pruning {int(spurious.sum())} spurious component(s): mu={self.means[spurious]}")
            self._compact(~spurious)
            self._renormalize()
        return self

    def observe(self, d: float) -> "IgmmModel":
        """Fold one model-domain distance into the mixture."""
        _require_finite(d)

        if self._count and self.squared_mahalanobis(d).min() < self._gate:
            self._update(d)
        else:
            self._create(d)

        self.remove_spurious()
        self.observation_count += 1
        return self

    # --- Hybrid-cost support ---
    def select_inlier_components(self, upsilon: float) -> np.ndarray:
        """Indices of the shortest mean-ordered prefix whose weight exceeds upsilon."""
        if self.is_empty:
            raise StateError("Inlier selection on an empty mixture")
        if not 0.0 <= upsilon <= 1.0:
            raise DomainError(f"upsilon must lie in [0, 1], got {upsilon}")

        if self.config.sort_order == SortOrder.DESCENDING:
            order = np.argsort(-self.means, kind="stable")
        else:
            order = np.argsort(self.means, kind="stable")

        cumulative = np.cumsum(self.weights[order])
        above = np.nonzero(cumulative > upsilon)[0]
        count = int(above[0]) + 1 if above.size else order.size
        return order[:count]

    def truncated_cdf(self, inliers: Sequence[int], d: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Cumulative probability of the renormalized inlier mixture at d."""
        inliers = np.asarray(inliers, dtype=np.int64)
        if inliers.size == 0:
            raise StateError("Truncated CDF needs at least one inlier component")
        d_arr = np.asarray(d, dtype=np.float64)
        if np.any(np.isnan(d_arr)):
            raise DomainError("d must not be NaN")

        w = self.weights[inliers]
        z = (d_arr[..., None] - self.means[inliers]) / np.sqrt(self.variances[inliers])
        cdf = np.sum(normal_cdf(z) * w, axis=-1) / np.sum(w)
        return float(cdf) if cdf.ndim == 0 else cdf

    def density(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Mixture pdf (all components)."""
        return self.inlier_density(x, np.arange(len(self)))

    def inlier_density(self, x: Union[float, np.ndarray], inliers: Sequence[int]) -> Union[float, np.ndarray]:
        """Pdf of the renormalized sub-mixture formed by `inliers`."""
        inliers = np.asarray(inliers, dtype=np.int64)
        if inliers.size == 0:
            raise StateError("Density needs at least one component")
        x_arr = np.asarray(x, dtype=np.float64)
        w = self.weights[inliers]
        pdf = gaussian_pdf(x_arr[..., None], self.means[inliers], self.variances[inliers])
        out = np.sum(pdf * w, axis=-1) / np.sum(w)
        return float(out) if out.ndim == 0 else out

    # --- Serialization ---
    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.model_dump(mode="json"),
            "observation_count": self.observation_count,
            "components": [asdict(c) for c in self.components],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IgmmModel":
        model = cls(IgmmConfig.model_validate(data.get("config", {})))
        components = data.get("components", [])
        model.set_components(
            weights=[c["weight"] for c in components],
            means=[c["mean"] for c in components],
            variances=[c["variance"] for c in components],
            mass=[c["mass"] for c in components],
            age=[c["age"] for c in components],
        )
        model.observation_count = int(data.get("observation_count", 0))
        return model

    def copy(self) -> "IgmmModel":
        clone = IgmmModel(self.config)
        for name in ("_weights", "_means", "_variances", "_mass", "_age"):
            getattr(clone, name)[:] = getattr(self, name)
        clone._count = self._count
        clone.observation_count = self.observation_count
        return clone

    def get_status(self) -> Dict[str, Any]:
        status = {
            "components": len(self),
            "observations": self.observation_count,
            "update_gate": self._gate,
        }
        if not self.is_empty:
            dominant = self.dominant_component()
            status["dominant"] = {"mean": dominant.mean, "variance": dominant.variance, "weight": dominant.weight}
        return status

    # --- Internals ---
    # Inputs below are already validated; no per-call checks.
    def _responsibilities(self, d: float) -> np.ndarray:
        weighted = self.weights * gaussian_pdf(d, self.means, self.variances, validate=False)
        total = float(weighted.sum())
        if not math.isfinite(total) or total <= 0.0:
            # every density underflowed: the nearest mean takes it all
            responsibilities = np.zeros(self._count)
            responsibilities[int(np.argmin(np.abs(d - self.means)))] = 1.0
            return responsibilities
        return weighted / total

    def _create(self, d: float) -> None:
        if self._count >= self.config.max_components:
            weakest = int(np.argmin(self.weights))
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(
                    f"Mixture full ({self._count} components), discarding mu={self.means[weakest]:.4f} "
                    f"pi={self.weights[weakest]:.4f}"
                )
            keep = np.ones(self._count, dtype=bool)
            keep[weakest] = False
            self._compact(keep)

        k = self._count
        self._means[k] = d
        self._variances[k] = self.config.initial_variance
        self._mass[k] = 1.0
        self._age[k] = 1
        self._count = k + 1
        self._weights[k] = 1.0 / float(self.mass.sum())
        self._renormalize()

    def _update(self, d: float) -> None:
        responsibilities = self._responsibilities(d)
        k = self._count
        age, mass = self._age[:k], self._mass[:k]
        means, variances = self._means[:k], self._variances[:k]

        age += 1
        mass += responsibilities
        xi = responsibilities / mass

        diff = d - means
        means += xi * diff
        residual = d - means
        variances -= xi * (variances - residual * residual) + xi * xi * diff * diff
        np.maximum(variances, self._floor, out=variances)
        np.divide(mass, mass.sum(), out=self._weights[:k])

    def _compact(self, keep: np.ndarray) -> None:
        """Keep the flagged components in their current order."""
        k = int(keep.sum())
        for buffer in (self._weights, self._means, self._variances, self._mass, self._age):
            buffer[:k] = buffer[: self._count][keep]
        self._count = k

    def _renormalize(self) -> None:
        if self._count == 0:
            return
        weights = self._weights[: self._count]
        total = float(weights.sum())
        if total > 0:
            weights /= total
        else:
            weights[:] = 1.0 / self._count


def _require_finite(d: float) -> None:
    if not math.isfinite(d):
        raise DomainError(f"distance must be finite, got {d!r}")
