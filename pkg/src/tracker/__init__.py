from .track import Track
from .tracker import MultiObjectTracker

__all__ = [
    "Track",
    "MultiObjectTracker",
]
