import logging

import numpy as np
from scipy.linalg import expm

from helpers.errors import InvalidParameterError, InvalidSizeError, MagnitudeOverflowError
from spectral.system import SystemMatrix

logger = logging.getLogger(__name__)

# exp(|t| * |K|_inf) bounds |exp(tK)|; beyond log(float max) the entries may not be representable.
OVERFLOW_EXPONENT = float(np.log(np.finfo(float).max))


def expm_apply(system: SystemMatrix, t: float, x0) -> np.ndarray:
    """x(t) = exp(tK) x0 by scaling and squaring with Pade approximation."""
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape != (system.size,):
        raise InvalidSizeError(f"Initial vector must have length {system.size}, got shape {x0.shape}")
    if not np.isfinite(t):
        raise InvalidParameterError(f"Time must be finite, got {t}")
    if t == 0:
        return x0.copy()

    exponent = abs(t) * system.max_row_sum()
    if exponent > OVERFLOW_EXPONENT:
        raise MagnitudeOverflowError(
            f"|t|*|K|_inf = {exponent:.1f} exceeds {OVERFLOW_EXPONENT:.1f}; "
            f"evaluate this time with the log-domain reconstruction instead"
        )
    return expm(t * system.matrix) @ x0
