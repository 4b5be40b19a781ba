import hashlib
import logging
import os
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import eig, schur
from scipy.optimize import linear_sum_assignment

from helpers.errors import InvalidSizeError, NearDefectiveMatrixError, NotCirculantError
from spectral.system import SystemMatrix
from topology.coupling import detect_circulant

logger = logging.getLogger(__name__)

DEFAULT_DENSE_CAP = 2048
NORMALITY_TOLERANCE = 1e-10
RESIDUAL_LIMIT = 1e-6


class SpectrumSource(str, Enum):
    CDT = "cdt"
    DENSE = "dense"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs of K. Column k-1 of `eigenvectors` is the mode with 1-based label k."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    orthonormal: bool
    source: SpectrumSource
    spatial_frequency: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("eigenvalues", "eigenvectors", "spatial_frequency"):
            value = getattr(self, name)
            if value is not None:
                value = np.array(value, copy=True)
                value.setflags(write=False)
                object.__setattr__(self, name, value)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def labels(self) -> np.ndarray:
        return np.arange(1, self.size + 1)

    @property
    def spectrum_id(self) -> str:
        digest = hashlib.sha1()
        digest.update(self.source.value.encode())
        digest.update(np.ascontiguousarray(self.eigenvalues).tobytes())
        return digest.hexdigest()[:12]

    def __repr__(self):
        return f"Spectrum(N={self.size}, source={self.source.value}, orthonormal={self.orthonormal})"


def dft_spatial_frequency(n: int) -> np.ndarray:
    """q = m for m <= N/2, else m - N."""
    m = np.arange(n)
    return np.where(2 * m <= n, m, m - n)


def fourier_basis(n: int) -> np.ndarray:
    """v_k[j] = N^-1/2 exp(2 pi i j (k-1) / N); (j*m mod N) keeps the angles small."""
    index = np.arange(n)
    phase = (np.outer(index, index) % n) / n
    return np.exp(2j * np.pi * phase) / np.sqrt(n)


def cdt_spectrum(system: SystemMatrix) -> Spectrum:
    """Closed-form eigenpairs of a circulant K via the discrete Fourier basis."""
    generator = system.coupling.circulant_generator
    if generator is None:
        raise NotCirculantError(f"Coupling {system.coupling} has no circulant generator")
    n = system.size
    # sum_j g[j] exp(+2 pi i j m / N) is N times numpy's inverse DFT.
    eigenvalues = system.factor * (n * np.fft.ifft(generator))
    return Spectrum(
        eigenvalues=eigenvalues,
        eigenvectors=fourier_basis(n),
        orthonormal=True,
        source=SpectrumSource.CDT,
        spatial_frequency=dft_spatial_frequency(n),
    )


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first nonzero component is real and positive."""
    magnitudes = np.abs(vectors)
    threshold = 1e-12 * magnitudes.max(axis=0)
    first = np.argmax(magnitudes > threshold[None, :], axis=0)
    pivots = vectors[first, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def _fourier_order(vectors: np.ndarray) -> np.ndarray:
    """Column permutation putting eigenvectors in DFT order by maximal Fourier overlap."""
    overlap = np.abs(fourier_basis(vectors.shape[0]).conj().T @ vectors) ** 2
    rows, cols = linear_sum_assignment(-overlap)
    return cols[np.argsort(rows)]


def eigen_residuals(system: SystemMatrix, spectrum: Spectrum) -> np.ndarray:
    """Per-mode max-norm residual |K v_k - lambda_k v_k|."""
    k = system.matrix
    residual = k @ spectrum.eigenvectors - spectrum.eigenvectors * spectrum.eigenvalues[None, :]
    return np.abs(residual).max(axis=0)


def is_normal(k: np.ndarray) -> bool:
    scale = max(1.0, float(np.abs(k).sum(axis=1).max()))
    adjoint = k.conj().T
    commutator = k @ adjoint - adjoint @ k
    return float(np.abs(commutator).max()) <= NORMALITY_TOLERANCE * scale ** 2


def dense_spectrum(system: SystemMatrix, max_size: Optional[int] = None) -> Spectrum:
    """Numerical eigendecomposition of K (Schur vectors when K is normal).

    Without max_size the cap comes from KURALAB_DENSE_CAP, read on every call.
    """
    n = system.size
    if max_size is None:
        max_size = int(os.getenv("KURALAB_DENSE_CAP", str(DEFAULT_DENSE_CAP)))
    if n > max_size:
        raise InvalidSizeError(f"Dense eigensolver capped at N={max_size}, got N={n}")

    k = system.matrix
    normal = is_normal(k)
    if normal:
        # For normal K the complex Schur form is diagonal and the Schur vectors are orthonormal eigenvectors.
        _, vectors = schur(k, output="complex")
        vectors = _fix_phase(vectors)
        # Rayleigh-quotient refinement of the diagonal.
        eigenvalues = np.einsum("ij,ij->j", vectors.conj(), k @ vectors)
    else:
        eigenvalues, vectors = eig(k)
        vectors = _fix_phase(vectors / np.linalg.norm(vectors, axis=0)[None, :])

    generator = system.coupling.circulant_generator
    if generator is None:
        generator = detect_circulant(system.coupling)
    if generator is not None:
        order = _fourier_order(vectors)
        spatial_frequency = dft_spatial_frequency(n)
    else:
        order = np.argsort(-eigenvalues.real, kind="stable")
        spatial_frequency = None

    spectrum = Spectrum(
        eigenvalues=eigenvalues[order],
        eigenvectors=vectors[:, order],
        orthonormal=normal,
        source=SpectrumSource.DENSE,
        spatial_frequency=spatial_frequency,
    )

    residuals = eigen_residuals(system, spectrum)
    worst = int(np.argmax(residuals))
    limit = RESIDUAL_LIMIT * max(1.0, system.max_row_sum())
    if residuals[worst] > limit:
        raise NearDefectiveMatrixError(mode_label=worst + 1, residual=float(residuals[worst]))

    logger.debug(f"Dense spectrum for N={n}: normal={normal}, worst residual {residuals[worst]:.2e}")
    return spectrum


def spectrum_for(system: SystemMatrix) -> Spectrum:
    """CDT when the coupling is circulant, dense otherwise."""
    if system.coupling.is_circulant:
        return cdt_spectrum(system)
    return dense_spectrum(system)


def match_eigenvalues(reference: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Indices idx such that other[idx] is the closest one-to-one pairing with reference."""
    cost = np.abs(np.asarray(reference)[:, None] - np.asarray(other)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cols[np.argsort(rows)]
