import logging
from typing import Callable, Optional

import numpy as np

from dynamics.initial import perturbation_kick
from dynamics.state import (
    PerturbationSpec,
    PhaseState,
    Provenance,
    Trajectory,
    kick_step,
    sample_times,
    sampling_stride,
)
from helpers.errors import DivergenceError, InvalidParameterError, InvalidSizeError
from topology.coupling import CouplingMatrix

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_DT_OUT = 1e-2


def kuramoto_rhs(theta: np.ndarray, weights: np.ndarray, epsilon: float, phi: float, omega: float = 0.0) -> np.ndarray:
    """omega + epsilon * sum_j A_ij sin(theta_j - theta_i - phi).

    Evaluated as Im(exp(-i(theta_i + phi)) * (A z)_i) with z = exp(i theta), one matrix-vector
    product per call with a fixed reduction order.
    """
    z = np.exp(1j * theta)
    coupling = (np.exp(-1j * phi) * z.conj()) * (weights @ z)
    return omega + epsilon * coupling.imag


def rk4_step(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    """One classic fourth-order Runge-Kutta step of an autonomous system."""
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def instantaneous_frequency(state: PhaseState, coupling: CouplingMatrix, epsilon: float, phi: float,
                            relative: bool = False) -> np.ndarray:
    """Right-hand side of the phase equation at `state` (rad/s); `relative` subtracts the population mean."""
    freqs = kuramoto_rhs(state.phases, coupling.weights, epsilon, phi, state.omega)
    if relative:
        freqs = freqs - freqs.mean()
    return freqs


def simulate(coupling: CouplingMatrix, epsilon: float, phi: float, state0: PhaseState, horizon: float,
             dt: float = DEFAULT_DT, dt_out: float = DEFAULT_DT_OUT,
             perturbation: Optional[PerturbationSpec] = None) -> Trajectory:
    """Fixed-step RK4 integration of the phase-lagged Kuramoto model."""
    if state0.size != coupling.size:
        raise InvalidSizeError(f"State has {state0.size} phases but coupling has N={coupling.size}")
    if not np.isfinite(epsilon) or not np.isfinite(phi):
        raise InvalidParameterError(f"epsilon and phi must be finite, got epsilon={epsilon}, phi={phi}")

    stride = sampling_stride(dt, dt_out)
    times = sample_times(state0.time, horizon, dt_out)
    total_steps = (times.size - 1) * stride

    kick_at = None
    if perturbation is not None:
        kick_at = kick_step(perturbation, times, dt)

    weights = coupling.weights
    omega = state0.omega

    def rhs(theta):
        return kuramoto_rhs(theta, weights, epsilon, phi, omega)

    logger.info(f"Simulating N={coupling.size} for {horizon} s ({total_steps} RK4 steps, dt={dt})")
    states = np.empty((times.size, coupling.size))
    theta = state0.phases.copy()
    for step in range(total_steps + 1):
        if step == kick_at:
            theta = theta + perturbation_kick(theta.size, perturbation)
            logger.info(f"Perturbation applied at t={state0.time + step * dt:.6g} s (amplitude {perturbation.amplitude:.4g})")
        if step % stride == 0:
            states[step // stride] = theta
        if step < total_steps:
            theta = rk4_step(rhs, theta, dt)
            if not np.all(np.isfinite(theta)):
                raise DivergenceError(state0.time + (step + 1) * dt)

    return Trajectory(sample_times=times, states=states, provenance=Provenance.SIMULATED)


def frequency_trace(trajectory: Trajectory, coupling: CouplingMatrix, epsilon: float, phi: float,
                    omega: float = 0.0) -> np.ndarray:
    """Instantaneous frequencies at every sample, one row per sample."""
    return np.vstack([
        kuramoto_rhs(row, coupling.weights, epsilon, phi, omega) for row in trajectory.states
    ])
