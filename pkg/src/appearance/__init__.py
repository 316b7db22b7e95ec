from .features import (
    as_feature,
    as_feature_matrix,
    cosine_distance,
    cosine_distances,
    ema_update,
    to_model_domain,
)
from .gallery import (
    FeatureGallery,
    min_distance,
    min_distances,
    knn_mean_distance,
    knn_mean_distances,
)

__all__ = [
    "as_feature",
    "as_feature_matrix",
    "cosine_distance",
    "cosine_distances",
    "ema_update",
    "to_model_domain",
    "FeatureGallery",
    "min_distance",
    "min_distances",
    "knn_mean_distance",
    "knn_mean_distances",
]
