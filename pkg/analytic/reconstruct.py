import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence

import numpy as np

from analytic.modes import ModeCoefficients
from dynamics.state import PhaseState
from helpers.errors import (
    DegenerateReconstructionError,
    InvalidParameterError,
    InvalidSizeError,
    UndefinedArgumentError,
)
from observables.comparison import wrapped_difference
from spectral.spectrum import Spectrum

logger = logging.getLogger(__name__)

# Components this far below the largest one have no trustworthy argument.
VANISHING_RATIO = 1e-12


def subset_indices(subset: Optional[Iterable[int]], n: int) -> Optional[np.ndarray]:
    """0-based column indices for a set of 1-based mode labels, ascending; None means all modes."""
    if subset is None:
        return None
    labels = np.unique(np.fromiter((int(label) for label in subset), dtype=int))
    if labels.size == 0:
        raise InvalidParameterError("Mode subset must not be empty")
    if labels[0] < 1 or labels[-1] > n:
        raise InvalidParameterError(f"Mode labels must lie in 1..{n}, got {labels[0]}..{labels[-1]}")
    if labels.size == n:
        return None
    return labels - 1


def reconstruct_state(coeffs: ModeCoefficients, spectrum: Spectrum, t: float,
                      subset: Optional[Iterable[int]] = None) -> np.ndarray:
    """sum_k exp(g_k(t) - M(t)) exp(i(arg c_k + Im(lambda_k) t)) v_k over the subset.

    g_k(t) = log|c_k| + Re(lambda_k) t and M(t) is the largest finite g_k in the subset, so the result is
    x(t) rescaled by the positive real exp(-M(t)): every argument is preserved and nothing overflows.
    """
    if coeffs.size != spectrum.size:
        raise InvalidSizeError(f"{coeffs.size} coefficients for a spectrum of {spectrum.size} modes")
    index = subset_indices(subset, spectrum.size)

    g = coeffs.log_magnitude + spectrum.eigenvalues.real * t
    phase = coeffs.argument + spectrum.eigenvalues.imag * t
    vectors = spectrum.eigenvectors
    if index is not None:
        g, phase, vectors = g[index], phase[index], vectors[:, index]

    contributing = np.isfinite(g)
    if not contributing.any():
        raise DegenerateReconstructionError(f"No mode in the subset contributes at t = {t:.6g} s")
    weights = np.zeros(g.size, dtype=complex)
    weights[contributing] = np.exp(g[contributing] - g[contributing].max() + 1j * phase[contributing])
    return vectors @ weights


def reconstruct_phases(coeffs: ModeCoefficients, spectrum: Spectrum, t: float,
                       subset: Optional[Iterable[int]] = None, omega: float = 0.0) -> PhaseState:
    """Phases Arg(x(t)) of the analytic solution, optionally from a subset of modes."""
    x = reconstruct_state(coeffs, spectrum, t, subset)
    magnitude = np.abs(x)
    vanishing = np.flatnonzero(magnitude <= VANISHING_RATIO * magnitude.max())
    if vanishing.size:
        raise UndefinedArgumentError(index=int(vanishing[0]), time=t)
    return PhaseState(time=t, phases=np.angle(x) + omega * t, omega=omega)


def first_last_subsets(n: int, k: int) -> Dict[str, np.ndarray]:
    """The first k labels, the last k labels, and their union."""
    if k < 1 or 2 * k > n:
        raise InvalidParameterError(f"Truncation size k={k} must satisfy 1 <= k <= n/2 for n={n}")
    first = np.arange(1, k + 1)
    last = np.arange(n - k + 1, n + 1)
    return {"first": first, "last": last, "first_last": np.concatenate([first, last])}


def truncation_errors(coeffs: ModeCoefficients, spectrum: Spectrum, times: Sequence[float],
                      subsets: Mapping[str, Iterable[int]]) -> Dict[str, Dict[float, float]]:
    """Circular RMSE (rad) of each truncated reconstruction against the full one, per time."""
    errors = {name: {} for name in subsets}
    for t in times:
        full = reconstruct_phases(coeffs, spectrum, t).phases
        for name, subset in subsets.items():
            partial = reconstruct_phases(coeffs, spectrum, t, subset).phases
            errors[name][float(t)] = float(np.sqrt(np.mean(wrapped_difference(partial, full) ** 2)))
    return errors
