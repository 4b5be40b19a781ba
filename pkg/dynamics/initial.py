import numpy as np

from dynamics.state import PerturbationSpec, PhaseState
from helpers.errors import AliasingError, InvalidParameterError, InvalidSizeError


def init_random(n: int, seed: int, omega: float = 0.0) -> PhaseState:
    """Phases i.i.d. uniform on [-pi, pi], reproducible per seed."""
    if n < 1:
        raise InvalidSizeError(f"Need at least one oscillator, got n={n}")
    rng = np.random.default_rng(seed)
    return PhaseState(time=0.0, phases=rng.uniform(-np.pi, np.pi, n), omega=omega)


def init_twisted(n: int, q: int, omega: float = 0.0) -> PhaseState:
    """q-twisted state theta_j = 2 pi q j / n."""
    if n < 1:
        raise InvalidSizeError(f"Need at least one oscillator, got n={n}")
    if 2 * abs(q) >= n:
        raise AliasingError(f"Twist q={q} aliases on n={n} oscillators (need |q| < n/2)")
    j = np.arange(n)
    # (q*j mod n) keeps the angle in [0, 2 pi) before scaling.
    return PhaseState(time=0.0, phases=2 * np.pi * ((q * j) % n) / n, omega=omega)


def perturbation_kick(n: int, spec: PerturbationSpec) -> np.ndarray:
    if spec.kind != "uniform_additive":
        raise InvalidParameterError(f"Unsupported perturbation kind {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)
    return rng.uniform(-spec.amplitude, spec.amplitude, n)


def apply_perturbation(state: PhaseState, spec: PerturbationSpec) -> PhaseState:
    """Add the seeded uniform kick to every phase; time is unchanged."""
    if spec.amplitude == 0:
        return state
    return state.with_phases(state.phases + perturbation_kick(state.size, spec))
