from typing import TYPE_CHECKING

from src.appearance import to_model_domain

if TYPE_CHECKING:
    from src.tracker.track import Track


def record_assignment_distance(track: "Track", d_raw: float) -> "Track":
    """Append d_raw^(1/4) to the track's records and feed it to its mixture."""
    d = to_model_domain(d_raw)
    track.distance_records.append(d)
    track.igmm.observe(d)
    return track
