import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from helpers.errors import InvalidParameterError, InvalidSizeError

logger = logging.getLogger(__name__)

CIRCULANT_TOLERANCE = 1e-12


def _frozen(values, dtype=float):
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def circulant_from_generator(generator) -> np.ndarray:
    """Expand a first row into the full circulant matrix, weights[i][j] = g[(j - i) mod N]."""
    generator = np.asarray(generator, dtype=float)
    n = generator.size
    index = np.arange(n)
    return generator[(index[None, :] - index[:, None]) % n]


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Real non-negative N x N coupling weights A, with symmetry and circulant metadata."""

    weights: np.ndarray
    is_symmetric: bool
    circulant_generator: Optional[np.ndarray] = None

    def __post_init__(self):
        weights = _frozen(self.weights)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1] or weights.shape[0] < 1:
            raise InvalidSizeError(f"Coupling weights must be a non-empty square matrix, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidParameterError("Coupling weights must be finite and non-negative")
        if np.any(np.diag(weights) != 0):
            raise InvalidParameterError("Coupling weights must have a zero diagonal (no self-coupling)")
        if self.is_symmetric and not np.array_equal(weights, weights.T):
            raise InvalidParameterError("Coupling flagged symmetric but weights[i][j] != weights[j][i]")
        object.__setattr__(self, "weights", weights)

        if self.circulant_generator is not None:
            generator = _frozen(self.circulant_generator)
            if generator.shape != (weights.shape[0],):
                raise InvalidSizeError(f"Circulant generator must have length {weights.shape[0]}")
            if not np.array_equal(circulant_from_generator(generator), weights):
                raise InvalidParameterError("Weights are not generated by the stored circulant generator")
            object.__setattr__(self, "circulant_generator", generator)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def is_circulant(self) -> bool:
        return self.circulant_generator is not None

    def stripped(self) -> "CouplingMatrix":
        """Same weights without circulant metadata."""
        return CouplingMatrix(weights=self.weights, is_symmetric=self.is_symmetric)

    def __repr__(self):
        kind = "circulant" if self.is_circulant else "dense"
        return f"CouplingMatrix(N={self.size}, {kind}, symmetric={self.is_symmetric})"


def from_weights(weights) -> CouplingMatrix:
    """Wrap an explicit matrix, detecting symmetry and circulant structure."""
    weights = np.asarray(weights, dtype=float)
    is_symmetric = weights.ndim == 2 and weights.shape[0] == weights.shape[1] and np.array_equal(weights, weights.T)
    generator = detect_circulant(weights) if is_square(weights) else None
    if generator is not None and not np.array_equal(circulant_from_generator(generator), weights):
        # Circulant within tolerance only: keep the matrix as given, without the fast-path metadata.
        generator = None
    return CouplingMatrix(weights=weights, is_symmetric=is_symmetric, circulant_generator=generator)


def is_square(weights) -> bool:
    weights = np.asarray(weights)
    return weights.ndim == 2 and weights.shape[0] == weights.shape[1]


def detect_circulant(weights: Union[CouplingMatrix, np.ndarray]) -> Optional[np.ndarray]:
    """Return the first row if every row is its cyclic shift (abs. tolerance 1e-12), else None."""
    if isinstance(weights, CouplingMatrix):
        weights = weights.weights
    weights = np.asarray(weights, dtype=float)
    if not is_square(weights):
        raise InvalidSizeError(f"Circulant detection needs a square matrix, got shape {weights.shape}")

    generator = weights[0].copy()
    if np.allclose(circulant_from_generator(generator), weights, rtol=0.0, atol=CIRCULANT_TOLERANCE):
        return generator
    return None


def normalize_rows(coupling: CouplingMatrix) -> CouplingMatrix:
    """Divide each row by its sum; rows summing to zero are left untouched."""
    row_sums = coupling.weights.sum(axis=1)
    safe = np.where(row_sums > 0, row_sums, 1.0)
    weights = coupling.weights / safe[:, None]

    generator = None
    if coupling.is_circulant:
        # All rows of a circulant share one sum, so the shape survives normalization.
        generator = coupling.circulant_generator / safe[0]
        weights = circulant_from_generator(generator)
    is_symmetric = coupling.is_symmetric and np.array_equal(weights, weights.T)
    return CouplingMatrix(weights=weights, is_symmetric=is_symmetric, circulant_generator=generator)


def load_coupling_csv(path: Union[str, Path]) -> CouplingMatrix:
    """Read N rows of N comma-separated reals, no header."""
    frame = pd.read_csv(path, header=None, dtype=float)
    coupling = from_weights(frame.to_numpy())
    logger.info(f"Loaded coupling from {path}: {coupling}")
    return coupling


def save_coupling_csv(coupling: CouplingMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(coupling.weights).to_csv(path, header=False, index=False, float_format="%.17g")
    return path
