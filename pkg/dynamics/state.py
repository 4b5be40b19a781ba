from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from helpers.errors import InvalidParameterError, SamplingGridError

GRID_TOLERANCE = 1e-9


def wrap_phase(theta):
    """Map phases into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2 * np.pi)


def _frozen(values):
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Phases theta_i (radians, unwrapped) at a given time, plus the common natural frequency."""

    time: float
    phases: np.ndarray
    omega: float = 0.0

    def __post_init__(self):
        phases = _frozen(self.phases)
        if phases.ndim != 1:
            raise InvalidParameterError(f"Phases must be a vector, got shape {phases.shape}")
        object.__setattr__(self, "phases", phases)

    @property
    def size(self) -> int:
        return self.phases.size

    @property
    def wrapped(self) -> np.ndarray:
        return wrap_phase(self.phases)

    def with_phases(self, phases) -> "PhaseState":
        return PhaseState(time=self.time, phases=phases, omega=self.omega)


class PerturbationSpec(BaseModel):
    """Finite kick added to every phase: i.i.d. uniform on [-amplitude, amplitude]."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    at_time: float
    amplitude: float = Field(ge=0)
    kind: Literal["uniform_additive"] = "uniform_additive"
    seed: int = 0


class Provenance(str, Enum):
    SIMULATED = "simulated"
    ANALYTIC = "analytic"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Phases sampled on a uniform grid: one row per sample, one column per oscillator."""

    sample_times: np.ndarray
    states: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        times = _frozen(self.sample_times)
        states = _frozen(self.states)
        if states.ndim != 2 or states.shape[0] != times.size:
            raise InvalidParameterError(f"States shape {states.shape} does not match {times.size} samples")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise SamplingGridError("Sample times must be strictly increasing")
        if steps.size and not np.allclose(steps, steps[0], rtol=GRID_TOLERANCE, atol=1e-12):
            raise SamplingGridError("Sample times must be uniformly spaced")
        object.__setattr__(self, "sample_times", times)
        object.__setattr__(self, "states", states)

    @property
    def size(self) -> int:
        return self.states.shape[1]

    @property
    def wrapped(self) -> np.ndarray:
        return wrap_phase(self.states)

    def state(self, index: int, omega: float = 0.0) -> PhaseState:
        return PhaseState(time=float(self.sample_times[index]), phases=self.states[index], omega=omega)


def sampling_stride(dt: float, dt_out: float) -> int:
    """Integration steps per output sample; dt_out must be an integer multiple of dt."""
    if dt <= 0 or dt_out <= 0:
        raise SamplingGridError(f"Time steps must be positive, got dt={dt}, dt_out={dt_out}")
    ratio = dt_out / dt
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > GRID_TOLERANCE * max(1.0, ratio):
        raise SamplingGridError(f"dt_out={dt_out} is not an integer multiple of dt={dt}")
    return stride


def sample_times(t0: float, horizon: float, dt_out: float) -> np.ndarray:
    if horizon < dt_out:
        raise SamplingGridError(f"Horizon {horizon} is shorter than one output interval {dt_out}")
    count = int(np.floor(horizon / dt_out + GRID_TOLERANCE)) + 1
    return t0 + np.arange(count) * dt_out


def event_step(at_time: float, t0: float, dt: float) -> int:
    """Index of the first integration step boundary at or after at_time."""
    return int(np.ceil((at_time - t0) / dt - GRID_TOLERANCE))


def kick_step(perturbation: PerturbationSpec, times: np.ndarray, dt: float) -> int:
    """Integration step at which the perturbation lands; it must fall inside the sampled window."""
    if not times[0] <= perturbation.at_time <= times[-1]:
        raise InvalidParameterError(
            f"Perturbation at t={perturbation.at_time} lies outside the sampled window "
            f"[{times[0]:.6g}, {times[-1]:.6g}] s")
    return event_step(perturbation.at_time, times[0], dt)
