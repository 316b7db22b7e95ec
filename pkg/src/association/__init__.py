from .cost import (
    CostMatrix,
    distance_term,
    distance_terms,
    distance_matrix,
    hybrid_cost,
    hybrid_costs,
    build_cost_matrix,
)
from .solver import (
    Assignment,
    linear_assignment,
    solve_assignment,
    single_shot_match,
    cascade_match,
    associate,
)
from .records import record_assignment_distance

__all__ = [
    "CostMatrix",
    "distance_term",
    "distance_terms",
    "distance_matrix",
    "hybrid_cost",
    "hybrid_costs",
    "build_cost_matrix",
    "Assignment",
    "linear_assignment",
    "solve_assignment",
    "single_shot_match",
    "cascade_match",
    "associate",
    "record_assignment_distance",
]
