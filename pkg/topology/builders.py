import logging

import numpy as np

from helpers.errors import InvalidNeighborhoodError, InvalidParameterError, InvalidSizeError
from topology.coupling import CouplingMatrix, circulant_from_generator

logger = logging.getLogger(__name__)


def ring_distance(n: int) -> np.ndarray:
    """Periodic index distance d(0, j) = min(j, n - j) for j = 0..n-1."""
    offsets = np.arange(n)
    return np.minimum(offsets, n - offsets)


def _from_generator(generator: np.ndarray) -> CouplingMatrix:
    n = generator.size
    # Symmetric iff g[j] == g[n - j] for every j.
    is_symmetric = bool(np.array_equal(generator[1:], generator[1:][::-1]))
    return CouplingMatrix(
        weights=circulant_from_generator(generator),
        is_symmetric=is_symmetric,
        circulant_generator=generator,
    )


def build_complete(n: int) -> CouplingMatrix:
    """All-to-all unit coupling, generator (0, 1, ..., 1)."""
    if n < 2:
        raise InvalidSizeError(f"A complete graph needs n >= 2, got {n}")
    generator = np.ones(n)
    generator[0] = 0.0
    return _from_generator(generator)


def build_ring(n: int, k: int) -> CouplingMatrix:
    """Unit coupling to every node within ring distance k."""
    if n < 3:
        raise InvalidSizeError(f"A ring needs n >= 3, got {n}")
    if k < 1 or 2 * k >= n:
        raise InvalidNeighborhoodError(f"Ring neighborhood k={k} must satisfy 1 <= k < n/2 for n={n}")
    distance = ring_distance(n)
    generator = ((distance >= 1) & (distance <= k)).astype(float)
    return _from_generator(generator)


def build_power_law(n: int, alpha: float) -> CouplingMatrix:
    """Distance-dependent weights d(i, j) ** -alpha on the periodic index ring."""
    if n < 3:
        raise InvalidSizeError(f"A power-law ring needs n >= 3, got {n}")
    if not np.isfinite(alpha) or alpha < 0:
        raise InvalidParameterError(f"Power-law exponent must be finite and non-negative, got {alpha}")
    distance = ring_distance(n).astype(float)
    generator = np.zeros(n)
    generator[1:] = distance[1:] ** (-float(alpha))
    return _from_generator(generator)
