"""
Constant-velocity Kalman filter in (cx, cy, aspect, height) measurement space.

State is the 8-vector (cx, cy, a, h, vx, vy, va, vh). Process and measurement
noise scale with the box height.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from src.config import MOTION_DEFAULTS
from src.models import BoundingBox
from src.utils import StateError

NDIM = 4


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray  # 8
    covariance: np.ndarray  # 8 x 8

    def to_xyah(self) -> np.ndarray:
        return self.mean[:NDIM].copy()

    def to_tlwh(self) -> np.ndarray:
        ret = self.mean[:NDIM].copy()
        ret[2] *= ret[3]
        ret[:2] -= ret[2:] / 2
        return ret

    def to_box(self, confidence: float = 1.0) -> BoundingBox:
        return BoundingBox.from_xyah(self.mean[:NDIM], confidence=confidence)


class KalmanFilter:
    """Linear Kalman filter with a constant-velocity motion model, dt = 1 frame."""

    def __init__(
        self,
        std_weight_position: float = MOTION_DEFAULTS["std_weight_position"],
        std_weight_velocity: float = MOTION_DEFAULTS["std_weight_velocity"],
    ):
        self._motion_mat = np.eye(2 * NDIM)
        for i in range(NDIM):
            self._motion_mat[i, NDIM + i] = 1.0
        self._update_mat = np.eye(NDIM, 2 * NDIM)

        self.std_weight_position = std_weight_position
        self.std_weight_velocity = std_weight_velocity

    def initiate(self, box: BoundingBox) -> KalmanState:
        measurement = box.to_xyah()
        mean = np.r_[measurement, np.zeros_like(measurement)]

        h = measurement[3]
        std = [
            2 * self.std_weight_position * h,
            2 * self.std_weight_position * h,
            1e-2,
            2 * self.std_weight_position * h,
            10 * self.std_weight_velocity * h,
            10 * self.std_weight_velocity * h,
            1e-5,
            10 * self.std_weight_velocity * h,
        ]
        return KalmanState(mean=mean, covariance=np.diag(np.square(std)))

    def predict(self, state: KalmanState) -> KalmanState:
        h = state.mean[3]
        std_pos = [self.std_weight_position * h, self.std_weight_position * h, 1e-2, self.std_weight_position * h]
        std_vel = [self.std_weight_velocity * h, self.std_weight_velocity * h, 1e-5, self.std_weight_velocity * h]
        motion_cov = np.diag(np.square(np.r_[std_pos, std_vel]))

        mean = self._motion_mat @ state.mean
        covariance = np.linalg.multi_dot((self._motion_mat, state.covariance, self._motion_mat.T)) + motion_cov
        return KalmanState(mean=mean, covariance=_symmetrize(covariance))

    def project(self, state: KalmanState):
        """Predicted measurement mean and innovation covariance."""
        h = state.mean[3]
        std = [self.std_weight_position * h, self.std_weight_position * h, 1e-1, self.std_weight_position * h]
        innovation_cov = np.diag(np.square(std))

        mean = self._update_mat @ state.mean
        covariance = np.linalg.multi_dot((self._update_mat, state.covariance, self._update_mat.T))
        return mean, covariance + innovation_cov

    def update(self, state: KalmanState, box: BoundingBox) -> KalmanState:
        projected_mean, projected_cov = self.project(state)

        try:
            chol_factor, lower = linalg.cho_factor(projected_cov, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise StateError("innovation covariance is not positive definite") from exc

        kalman_gain = linalg.cho_solve(
            (chol_factor, lower),
            (state.covariance @ self._update_mat.T).T,
            check_finite=False,
        ).T
        innovation = box.to_xyah() - projected_mean

        mean = state.mean + innovation @ kalman_gain.T
        covariance = state.covariance - np.linalg.multi_dot((kalman_gain, projected_cov, kalman_gain.T))
        return KalmanState(mean=mean, covariance=_symmetrize(covariance))

    def gating_distance(self, state: KalmanState, measurements: np.ndarray) -> np.ndarray:
        """Squared Mahalanobis distance of each xyah row from the projected state."""
        measurements = np.atleast_2d(measurements)
        if measurements.size == 0:
            return np.zeros(0)
        mean, covariance = self.project(state)
        try:
            cholesky_factor = np.linalg.cholesky(covariance)
        except np.linalg.LinAlgError as exc:
            raise StateError("projected covariance is not positive definite") from exc
        d = measurements - mean
        z = linalg.solve_triangular(cholesky_factor, d.T, lower=True, check_finite=False)
        return np.sum(z * z, axis=0)

    def motion_gate(
        self,
        state: KalmanState,
        boxes: Sequence[BoundingBox],
        threshold: float = MOTION_DEFAULTS["gating_threshold"],
    ) -> np.ndarray:
        """True where the squared Mahalanobis distance is strictly below `threshold`."""
        if len(boxes) == 0:
            return np.zeros(0, dtype=bool)
        measurements = np.vstack([box.to_xyah() for box in boxes])
        return self.gating_distance(state, measurements) < threshold


def motion_gate(
    state: KalmanState,
    boxes: Sequence[BoundingBox],
    threshold: float = MOTION_DEFAULTS["gating_threshold"],
    kf: KalmanFilter = None,
) -> np.ndarray:
    return (kf or KalmanFilter()).motion_gate(state, boxes, threshold)


def _symmetrize(covariance: np.ndarray) -> np.ndarray:
    return 0.5 * (covariance + covariance.T)
