from .stats import gaussian_pdf, normal_cdf, chi2_quantile_1dof
from .mixture import Component, IgmmModel

__all__ = [
    "gaussian_pdf",
    "normal_cdf",
    "chi2_quantile_1dof",
    "Component",
    "IgmmModel",
]
