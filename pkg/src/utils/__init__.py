from .errors import (
    TrackingError,
    DomainError,
    StateError,
    ContractViolation,
    InputError,
    ParseError,
)
from .plot_data import (
    histogram_frame,
    density_grid,
    density_frame,
    components_frame,
)

__all__ = [
    "TrackingError",
    "DomainError",
    "StateError",
    "ContractViolation",
    "InputError",
    "ParseError",
    "histogram_frame",
    "density_grid",
    "density_frame",
    "components_frame",
]
