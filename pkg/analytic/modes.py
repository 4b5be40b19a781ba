import logging
from dataclasses import dataclass

import numpy as np

from dynamics.state import PhaseState
from helpers.errors import IllConditionedBasisError, InvalidSizeError
from spectral.spectrum import Spectrum, SpectrumSource

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e8
LN10 = np.log(10.0)


def _frozen(values):
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ModeCoefficients:
    """Expansion coefficients c_k of x(0) in the eigenbasis, kept as natural log-magnitude and argument.

    Exact zeros carry log_magnitude = -inf.
    """

    log_magnitude: np.ndarray
    argument: np.ndarray
    spectrum_ref: str

    def __post_init__(self):
        object.__setattr__(self, "log_magnitude", _frozen(self.log_magnitude))
        object.__setattr__(self, "argument", _frozen(self.argument))

    @property
    def size(self) -> int:
        return self.log_magnitude.size

    def complex_values(self) -> np.ndarray:
        """Linear c_k; only safe when the magnitudes are representable."""
        return np.exp(self.log_magnitude + 1j * self.argument)


@dataclass(frozen=True, eq=False)
class ModeTrace:
    """log|mu_k(t)| (natural log) and arg mu_k(t); rows are samples, columns are modes."""

    sample_times: np.ndarray
    log_mu: np.ndarray
    arg_mu: np.ndarray

    def __post_init__(self):
        for name in ("sample_times", "log_mu", "arg_mu"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def log10_mu(self) -> np.ndarray:
        return self.log_mu / LN10


def _to_log_form(c: np.ndarray, spectrum: Spectrum) -> ModeCoefficients:
    with np.errstate(divide="ignore"):
        log_magnitude = np.log(np.abs(c))
    return ModeCoefficients(log_magnitude=log_magnitude, argument=np.angle(c), spectrum_ref=spectrum.spectrum_id)


def project(x: np.ndarray, spectrum: Spectrum) -> np.ndarray:
    """Coefficients c with x = sum_k c_k v_k."""
    if spectrum.source is SpectrumSource.CDT:
        # <x, v_k> against the unitary Fourier basis is the forward DFT scaled by N^-1/2.
        return np.fft.fft(x) / np.sqrt(x.size)
    if spectrum.orthonormal:
        return spectrum.eigenvectors.conj().T @ x

    condition = np.linalg.cond(spectrum.eigenvectors)
    if not condition < CONDITION_LIMIT:
        raise IllConditionedBasisError(f"Eigenvector matrix condition number {condition:.3e} exceeds {CONDITION_LIMIT:.0e}")
    return np.linalg.solve(spectrum.eigenvectors, x)


def mode_coefficients(state0: PhaseState, spectrum: Spectrum) -> ModeCoefficients:
    """Project x(0) = exp(i theta(0)) onto the eigenmodes."""
    if state0.size != spectrum.size:
        raise InvalidSizeError(f"State has {state0.size} phases but spectrum has {spectrum.size} modes")
    x0 = np.exp(1j * state0.phases)
    return _to_log_form(project(x0, spectrum), spectrum)


def mode_contributions(coeffs: ModeCoefficients, spectrum: Spectrum, times) -> ModeTrace:
    """Closed-form log|mu_k(t)| = log|c_k| + Re(lambda_k) t and arg mu_k(t) = arg c_k + Im(lambda_k) t."""
    if coeffs.size != spectrum.size:
        raise InvalidSizeError(f"{coeffs.size} coefficients for a spectrum of {spectrum.size} modes")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    eigenvalues = spectrum.eigenvalues
    log_mu = coeffs.log_magnitude[None, :] + eigenvalues.real[None, :] * times[:, None]
    arg_mu = coeffs.argument[None, :] + eigenvalues.imag[None, :] * times[:, None]
    return ModeTrace(sample_times=times, log_mu=log_mu, arg_mu=arg_mu)


def dominant_modes(trace: ModeTrace) -> np.ndarray:
    """1-based label of the largest contribution at each sample."""
    return np.argmax(trace.log_mu, axis=1) + 1
