from dataclasses import dataclass

import numpy as np

from helpers.errors import InvalidParameterError

DEFAULT_LOCK_TOL = 1e-2
DEFAULT_LOCK_WINDOW = 1.0


@dataclass(frozen=True, eq=False)
class LockStatistics:
    """Per-window lock flags (windows x oscillators) and the locked fraction of each window."""

    window_starts: np.ndarray
    flags: np.ndarray
    locked_fraction: np.ndarray


def lock_statistics(freqs, sample_times, tol: float = DEFAULT_LOCK_TOL,
                    window: float = DEFAULT_LOCK_WINDOW) -> LockStatistics:
    """Oscillator i is locked on a window if |f_i - median_j f_j| < tol at every sample in it.

    Windows are consecutive, non-overlapping and start at the first sample; a trailing partial window is dropped.
    """
    freqs = np.asarray(freqs, dtype=float)
    sample_times = np.asarray(sample_times, dtype=float)
    if freqs.ndim != 2 or freqs.shape[0] != sample_times.size:
        raise InvalidParameterError(f"Frequencies shape {freqs.shape} does not match {sample_times.size} samples")
    span = sample_times[-1] - sample_times[0] if sample_times.size > 1 else 0.0
    if window <= 0 or window > span + 1e-9:
        raise InvalidParameterError(f"Lock window {window} s must be positive and within the sampled span {span} s")

    dt_out = sample_times[1] - sample_times[0]
    per_window = int(round(window / dt_out))
    count = (sample_times.size - 1) // per_window

    deviation = np.abs(freqs - np.median(freqs, axis=1, keepdims=True))
    flags = np.empty((count, freqs.shape[1]), dtype=bool)
    for w in range(count):
        start = w * per_window
        flags[w] = np.all(deviation[start:start + per_window + 1] < tol, axis=0)

    return LockStatistics(
        window_starts=sample_times[np.arange(count) * per_window],
        flags=flags,
        locked_fraction=flags.mean(axis=1),
    )


def frequency_spread(freqs) -> np.ndarray:
    """max - min of the instantaneous frequencies at each sample."""
    freqs = np.asarray(freqs, dtype=float)
    return freqs.max(axis=1) - freqs.min(axis=1)
