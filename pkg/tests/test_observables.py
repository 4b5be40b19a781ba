import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dynamics.initial import init_twisted
from dynamics.state import PhaseState, Provenance, Trajectory
from helpers.errors import AlignmentError, InvalidParameterError, InvalidSizeError
from observables.comparison import circular_error, wrapped_difference
from observables.locking import frequency_spread, lock_statistics
from observables.order import order_parameter, order_parameter_series


def _trajectory(states, dt_out=0.1, provenance=Provenance.SIMULATED):
    states = np.asarray(states, dtype=float)
    return Trajectory(sample_times=np.arange(states.shape[0]) * dt_out, states=states, provenance=provenance)


def test_order_parameter():
    assert order_parameter(PhaseState(time=0.0, phases=np.full(5, 1.3))) == pytest.approx(1.0)
    assert order_parameter(init_twisted(8, 1)) == pytest.approx(0.0, abs=1e-12)
    assert order_parameter(np.array([0.0, math.pi])) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidSizeError):
        order_parameter(np.array([]))


def test_order_parameter_series():
    series = order_parameter_series(_trajectory([[0.0, 0.0], [0.0, math.pi]]))
    assert_allclose(series, [1.0, 0.0], atol=1e-12)


def test_wrapped_difference():
    assert wrapped_difference(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(-0.2)
    assert wrapped_difference(0.3, 0.3 + 2 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_self_comparison_is_zero():
    rng = np.random.default_rng(0)
    trajectory = _trajectory(rng.uniform(-math.pi, math.pi, (11, 6)))
    report = circular_error(trajectory, trajectory)
    assert report.circular_rmse == 0.0
    assert report.max_abs_order_param_gap == 0.0
    assert report.per_time_rmse == [0.0] * 11
    assert report.horizon == pytest.approx(1.0)


def test_constant_offset_comparison():
    rng = np.random.default_rng(1)
    states = rng.uniform(-math.pi, math.pi, (5, 4))
    report = circular_error(_trajectory(states + 0.25), _trajectory(states, provenance=Provenance.ANALYTIC))
    assert report.circular_rmse == pytest.approx(0.25)
    assert report.max_abs_order_param_gap == pytest.approx(0.0, abs=1e-12)


def test_comparison_alignment():
    with pytest.raises(AlignmentError):
        circular_error(_trajectory(np.zeros((5, 4))), _trajectory(np.zeros((5, 3))))
    with pytest.raises(AlignmentError):
        circular_error(_trajectory(np.zeros((5, 4))), _trajectory(np.zeros((5, 4)), dt_out=0.2))


def test_lock_statistics():
    times = np.arange(21) * 0.1
    freqs = np.zeros((21, 5))
    freqs[:, 4] = 1.0
    stats = lock_statistics(freqs, times, tol=1e-2, window=1.0)
    assert stats.window_starts.tolist() == pytest.approx([0.0, 1.0])
    assert stats.locked_fraction.tolist() == [0.8, 0.8]
    assert stats.flags[:, 4].tolist() == [False, False]

    assert lock_statistics(freqs, times, tol=np.inf, window=1.0).locked_fraction.tolist() == [1.0, 1.0]
    with pytest.raises(InvalidParameterError):
        lock_statistics(freqs, times, window=5.0)


def test_frequency_spread():
    assert_allclose(frequency_spread([[0.0, 1.0, -2.0], [1.0, 1.0, 1.0]]), [3.0, 0.0])
