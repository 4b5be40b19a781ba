import logging
from typing import List

import numpy as np
from pydantic import BaseModel, Field

from dynamics.state import Trajectory
from helpers.errors import AlignmentError

logger = logging.getLogger(__name__)


def wrapped_difference(a, b) -> np.ndarray:
    """Arg(exp(i(a - b))): the signed circular distance in (-pi, pi]."""
    return np.angle(np.exp(1j * (np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


class ComparisonReport(BaseModel):
    """How closely two trajectories sampled on the same grid agree."""

    max_abs_order_param_gap: float = Field(ge=0, le=1)
    circular_rmse: float = Field(ge=0, le=np.pi)
    per_time_rmse: List[float]
    horizon: float


def circular_error(traj_a: Trajectory, traj_b: Trajectory) -> ComparisonReport:
    if traj_a.states.shape != traj_b.states.shape:
        raise AlignmentError(f"Trajectory shapes differ: {traj_a.states.shape} vs {traj_b.states.shape}")
    if not np.allclose(traj_a.sample_times, traj_b.sample_times, rtol=0.0, atol=1e-9):
        raise AlignmentError("Trajectories are sampled on different time grids")

    difference = wrapped_difference(traj_a.states, traj_b.states)
    per_time = np.sqrt(np.mean(difference ** 2, axis=1))
    overall = float(np.sqrt(np.mean(difference ** 2)))

    r_a = np.abs(np.exp(1j * traj_a.states).mean(axis=1))
    r_b = np.abs(np.exp(1j * traj_b.states).mean(axis=1))
    gap = float(np.abs(r_a - r_b).max())

    return ComparisonReport(
        # Rounding can push these a hair past their bounds.
        max_abs_order_param_gap=min(gap, 1.0),
        circular_rmse=min(overall, float(np.pi)),
        per_time_rmse=per_time.tolist(),
        horizon=float(traj_a.sample_times[-1] - traj_a.sample_times[0]),
    )
