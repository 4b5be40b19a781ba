from typing import Union

import numpy as np

from dynamics.state import PhaseState, Trajectory
from helpers.errors import InvalidSizeError


def order_parameter(state: Union[PhaseState, np.ndarray]) -> float:
    """Kuramoto order parameter R = |mean_j exp(i theta_j)|."""
    phases = state.phases if isinstance(state, PhaseState) else np.asarray(state, dtype=float)
    if phases.size < 1:
        raise InvalidSizeError("Order parameter needs at least one oscillator")
    return float(np.abs(np.exp(1j * phases).mean()))


def order_parameter_series(trajectory: Trajectory) -> np.ndarray:
    return np.abs(np.exp(1j * trajectory.states).mean(axis=1))
