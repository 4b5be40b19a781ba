import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from analytic.modes import ModeTrace, mode_coefficients
from analytic.reconstruct import reconstruct_phases, subset_indices
from dynamics.initial import apply_perturbation
from dynamics.integrator import DEFAULT_DT, DEFAULT_DT_OUT
from dynamics.state import (
    PerturbationSpec,
    PhaseState,
    Provenance,
    Trajectory,
    kick_step,
    sample_times,
    sampling_stride,
)
from helpers.errors import InvalidSizeError
from spectral.spectrum import Spectrum, spectrum_for
from spectral.system import assemble_system
from topology.coupling import CouplingMatrix

logger = logging.getLogger(__name__)


def analytic_trajectory(coupling: CouplingMatrix, epsilon: float, phi: float, state0: PhaseState, horizon: float,
                        dt_out: float = DEFAULT_DT_OUT, perturbation: Optional[PerturbationSpec] = None,
                        subset: Optional[Iterable[int]] = None, dt: float = DEFAULT_DT,
                        spectrum: Optional[Spectrum] = None) -> Tuple[Trajectory, ModeTrace]:
    """Arg of x(t) = exp(tK) x(0) on the output grid, evaluated through the eigenmode expansion.

    A perturbation is applied at the same integration-grid instant the simulator uses: the analytic
    phases are kicked with the identical seeded vector, re-projected, and evaluation resumes from there.
    """
    if state0.size != coupling.size:
        raise InvalidSizeError(f"State has {state0.size} phases but coupling has N={coupling.size}")
    if spectrum is None:
        spectrum = spectrum_for(assemble_system(coupling, epsilon, phi))
    if subset is not None:
        subset_indices(subset, coupling.size)

    stride = sampling_stride(dt, dt_out)
    times = sample_times(state0.time, horizon, dt_out)
    kick_at = None
    if perturbation is not None:
        kick_at = kick_step(perturbation, times, dt)

    omega = state0.omega
    coeffs = mode_coefficients(state0, spectrum)
    segment_start = state0.time
    eigenvalues = spectrum.eigenvalues

    states = np.empty((times.size, coupling.size))
    log_mu = np.empty((times.size, coupling.size))
    arg_mu = np.empty((times.size, coupling.size))
    for i, t in enumerate(times):
        if kick_at is not None and i * stride >= kick_at:
            t_event = state0.time + kick_at * dt
            before = reconstruct_phases(coeffs, spectrum, t_event - segment_start, subset, omega)
            kicked = apply_perturbation(PhaseState(time=t_event, phases=before.phases, omega=omega), perturbation)
            coeffs = mode_coefficients(kicked, spectrum)
            segment_start = t_event
            kick_at = None
            logger.info(f"Analytic path re-projected after the perturbation at t={t_event:.6g} s")

        tau = t - segment_start
        states[i] = reconstruct_phases(coeffs, spectrum, tau, subset, omega).phases
        log_mu[i] = coeffs.log_magnitude + eigenvalues.real * tau
        arg_mu[i] = coeffs.argument + eigenvalues.imag * tau

    trajectory = Trajectory(sample_times=times, states=states, provenance=Provenance.ANALYTIC)
    return trajectory, ModeTrace(sample_times=times, log_mu=log_mu, arg_mu=arg_mu)
