"""CSV-ready plot data: distance histograms and fitted mixture curves."""

from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
import pandas as pd

if TYPE_CHECKING:
    from src.igmm import IgmmModel


def histogram_frame(values: Sequence[float], bins: int = 30, value_range: Optional[tuple] = None) -> pd.DataFrame:
    """Counts and normalized density per bin."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return pd.DataFrame(columns=["bin_left", "bin_right", "count", "density"])
    if value_range is None:
        lo, hi = float(values.min()), float(values.max())
        if hi <= lo:
            lo, hi = lo - 0.05, hi + 0.05
        value_range = (lo, hi)

    counts, edges = np.histogram(values, bins=bins, range=value_range)
    widths = np.diff(edges)
    return pd.DataFrame(
        {
            "bin_left": edges[:-1],
            "bin_right": edges[1:],
            "count": counts,
            "density": counts / (values.size * widths),
        }
    )


def density_grid(model: "IgmmModel", points: int = 1001, span: float = 6.0) -> np.ndarray:
    """Grid covering every component out to `span` standard deviations."""
    sd = np.sqrt(model.variances)
    lo = float(np.min(model.means - span * sd))
    hi = float(np.max(model.means + span * sd))
    return np.linspace(lo, hi, points)


def density_frame(model: "IgmmModel", upsilon: float, grid: Optional[np.ndarray] = None) -> pd.DataFrame:
    """Full-mixture and inlier-only pdf over a grid; empty for an empty model."""
    if model.is_empty:
        return pd.DataFrame(columns=["x", "mixture_density", "inlier_density"])
    x = density_grid(model) if grid is None else np.asarray(grid, dtype=np.float64)
    inliers = model.select_inlier_components(upsilon)
    return pd.DataFrame(
        {
            "x": x,
            "mixture_density": model.density(x),
            "inlier_density": model.inlier_density(x, inliers),
        }
    )


def components_frame(model: "IgmmModel", upsilon: float) -> pd.DataFrame:
    """One row per component, flagged when it belongs to the inlier subset."""
    columns = ["component", "weight", "mean", "variance", "mass", "age", "inlier"]
    if model.is_empty:
        return pd.DataFrame(columns=columns)
    inliers = set(model.select_inlier_components(upsilon).tolist())
    return pd.DataFrame(
        [
            (k, c.weight, c.mean, c.variance, c.mass, c.age, k in inliers)
            for k, c in enumerate(model.components)
        ],
        columns=columns,
    )
