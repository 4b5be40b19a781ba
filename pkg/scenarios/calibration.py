"""Calibrations for the scenario parameters that presets leave open.

Each returns the chosen value plus whether it met its target, so the run manifest can record both.
"""
import logging
import math
from typing import Sequence, Tuple

import numpy as np
from tqdm import tqdm

from dynamics.integrator import frequency_trace, simulate
from dynamics.initial import init_random
from dynamics.state import PerturbationSpec, PhaseState
from helpers.errors import InvalidParameterError
from observables.locking import lock_statistics
from observables.order import order_parameter
from scenarios.config import ScenarioConfig
from spectral.spectrum import spectrum_for
from spectral.system import assemble_system
from topology.builders import build_power_law
from topology.coupling import CouplingMatrix, normalize_rows

logger = logging.getLogger(__name__)

AMPLITUDE_CANDIDATES = (math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi)
CHIMERA_ALPHAS = (0.5, 0.75, 1.0, 1.25, 1.5, 2.0)
CHIMERA_EPSILONS = (0.25, 0.5, 1.0, 2.0, 4.0)


def calibrate_epsilon(coupling: CouplingMatrix, gap_target: float) -> float:
    """epsilon for which the leading growth-rate gap Re(lambda_1 - lambda_2) equals gap_target."""
    spectrum = spectrum_for(assemble_system(coupling, 1.0, 0.0))
    rates = np.sort(spectrum.eigenvalues.real)[::-1]
    gap = rates[0] - rates[1]
    if gap <= 1e-12:
        raise InvalidParameterError(f"Coupling {coupling} has no leading eigenvalue gap to calibrate against")
    epsilon = gap_target / gap
    logger.info(f"Calibrated epsilon={epsilon:.6g} for growth-rate gap {gap_target} s^-1 (unit gap {gap:.6g})")
    return float(epsilon)


def calibrate_perturbation(coupling: CouplingMatrix, epsilon: float, phi: float, state0: PhaseState,
                           spec: PerturbationSpec, dt: float, dt_out: float, deadline: float = 10.0,
                           target: float = 0.99,
                           candidates: Sequence[float] = AMPLITUDE_CANDIDATES) -> Tuple[float, bool]:
    """Smallest kick amplitude that brings the order parameter above `target` by `deadline` seconds."""
    horizon = max(deadline, spec.at_time) - state0.time
    for amplitude in candidates:
        trial = spec.model_copy(update={"amplitude": amplitude})
        trajectory = simulate(coupling, epsilon, phi, state0, horizon, dt=dt, dt_out=dt_out, perturbation=trial)
        final_r = order_parameter(trajectory.states[-1])
        logger.info(f"Perturbation amplitude {amplitude:.4f}: R({deadline:g} s) = {final_r:.4f}")
        if final_r > target:
            return float(amplitude), True
    logger.warning(f"No perturbation amplitude reached R > {target} by t={deadline} s; using {candidates[-1]:.4f}")
    return float(candidates[-1]), False


def coexistence_duration(fractions: np.ndarray, window: float) -> float:
    """Total time covered by windows whose locked fraction lies strictly inside (0, 1)."""
    return float(np.count_nonzero((fractions > 0) & (fractions < 1)) * window)


def chimera_coupling(config: ScenarioConfig, alpha: float) -> CouplingMatrix:
    """Power-law coupling for a chimera candidate, row-normalized when the config asks for it."""
    coupling = build_power_law(config.n, alpha)
    if config.row_normalize:
        coupling = normalize_rows(coupling)
    return coupling


def calibrate_chimera(config: ScenarioConfig, alphas: Sequence[float] = CHIMERA_ALPHAS,
                      epsilons: Sequence[float] = CHIMERA_EPSILONS,
                      min_duration: float = 5.0) -> Tuple[float, float, bool]:
    """Sweep (epsilon, alpha) until the configured phase lag shows locked/drifting coexistence for min_duration."""
    state0 = init_random(config.n, config.seed, omega=config.omega)
    grid = [(epsilon, alpha) for alpha in alphas for epsilon in epsilons]
    for epsilon, alpha in tqdm(grid, desc="chimera sweep"):
        coupling = chimera_coupling(config, alpha)
        trajectory = simulate(coupling, epsilon, config.phi, state0, config.horizon, dt=config.dt, dt_out=config.dt_out)
        freqs = frequency_trace(trajectory, coupling, epsilon, config.phi, config.omega)
        stats = lock_statistics(freqs, trajectory.sample_times, config.lock_tol, config.lock_window)
        duration = coexistence_duration(stats.locked_fraction, config.lock_window)
        logger.info(f"Chimera sweep epsilon={epsilon:g}, alpha={alpha:g}: coexistence for {duration:g} s")
        if duration >= min_duration:
            return float(epsilon), float(alpha), True

    epsilon = config.epsilon if config.epsilon is not None else 1.0
    alpha = config.alpha if config.alpha is not None else 1.0
    logger.warning(f"No (epsilon, alpha) in the sweep showed coexistence for {min_duration} s; "
                   f"keeping epsilon={epsilon}, alpha={alpha}")
    return float(epsilon), float(alpha), False
