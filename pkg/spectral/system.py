from dataclasses import dataclass
from functools import cached_property

import numpy as np

from helpers.errors import InvalidParameterError
from topology.coupling import CouplingMatrix


@dataclass(frozen=True, eq=False)
class SystemMatrix:
    """K = epsilon * exp(-i phi) * A, materialized on demand."""

    coupling: CouplingMatrix
    epsilon: float
    phi: float

    @property
    def size(self) -> int:
        return self.coupling.size

    @property
    def factor(self) -> complex:
        return self.epsilon * np.exp(-1j * self.phi)

    @cached_property
    def matrix(self) -> np.ndarray:
        k = self.factor * self.coupling.weights.astype(complex)
        k.setflags(write=False)
        return k

    def max_row_sum(self) -> float:
        """Infinity norm of K (max row sum of |K_ij|)."""
        return float(self.epsilon * self.coupling.weights.sum(axis=1).max())


def assemble_system(coupling: CouplingMatrix, epsilon: float, phi: float) -> SystemMatrix:
    if not np.isfinite(epsilon) or not np.isfinite(phi):
        raise InvalidParameterError(f"epsilon and phi must be finite, got epsilon={epsilon}, phi={phi}")
    if epsilon <= 0:
        raise InvalidParameterError(f"Coupling strength epsilon must be positive, got {epsilon}")
    return SystemMatrix(coupling=coupling, epsilon=float(epsilon), phi=float(phi))
