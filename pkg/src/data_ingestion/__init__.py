from .motchallenge import (
    SequenceBundle,
    read_detections,
    write_detections,
    read_ground_truth,
    write_ground_truth,
    read_results,
    write_results,
    read_features,
    write_features,
    read_seqinfo,
    write_seqinfo,
    load_sequence,
    save_sequence,
)
from .synthetic import (
    orthogonal_means,
    correlated_means,
    generate_synthetic,
    ambiguity_suite_spec,
)

__all__ = [
    "SequenceBundle",
    "read_detections",
    "write_detections",
    "read_ground_truth",
    "write_ground_truth",
    "read_results",
    "write_results",
    "read_features",
    "write_features",
    "read_seqinfo",
    "write_seqinfo",
    "load_sequence",
    "save_sequence",
    "orthogonal_means",
    "correlated_means",
    "generate_synthetic",
    "ambiguity_suite_spec",
]
