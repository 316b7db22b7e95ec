from .kalman import KalmanState, KalmanFilter, motion_gate

__all__ = [
    "KalmanState",
    "KalmanFilter",
    "motion_gate",
]
