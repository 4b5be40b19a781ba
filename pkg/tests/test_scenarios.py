import json
import math

import numpy as np
import pydantic
import pytest
from numpy.testing import assert_allclose, assert_array_equal

import scenarios.calibration as calibration
from dynamics.initial import init_twisted
from dynamics.integrator import simulate
from dynamics.state import PerturbationSpec
from helpers.errors import ValidationError
from scenarios.calibration import calibrate_epsilon, calibrate_perturbation, coexistence_duration
from scenarios.config import (
    PRESETS,
    build_config,
    build_coupling,
    build_initial_state,
    load_config_file,
    parse_mode_subset,
)
from topology.builders import build_complete, build_ring
from topology.coupling import save_coupling_csv


def test_parse_mode_subset():
    assert parse_mode_subset("1-3, 7") == [1, 2, 3, 7]
    assert parse_mode_subset("1-10,216-225") == list(range(1, 11)) + list(range(216, 226))
    with pytest.raises(ValueError):
        parse_mode_subset("5-2")


@pytest.mark.parametrize("preset", [name for name in PRESETS if name != "custom"])
def test_presets_are_valid(preset):
    config = build_config(preset)
    assert config.preset == preset
    assert config.horizon <= 20


def test_preset_defaults():
    config = build_config("chimera_130")
    assert (config.n, config.phi, config.topology, config.alpha) == (225, 1.30, "power_law", 1.0)
    config = build_config("twisted_perturbed")
    assert config.perturbation == PerturbationSpec(at_time=2.0, amplitude=math.pi / 2, seed=2)
    assert build_config("repulsive").phi == pytest.approx(math.pi / 2)


def test_override_order():
    config = build_config("sync_complete", {"n": 20, "seed": 3}, {"n": 10, "seed": None})
    assert config.n == 10
    assert config.seed == 3


def test_config_rejects_bad_input():
    with pytest.raises(ValidationError):
        build_config("nonexistent")
    with pytest.raises(pydantic.ValidationError):
        build_config("sync_complete", {"colour": "blue"})
    with pytest.raises(pydantic.ValidationError):
        build_config("custom", {"topology": "ring", "n": 10, "phi": 0.0})
    with pytest.raises(pydantic.ValidationError):
        build_config("sync_complete", {"dt": 1e-3, "dt_out": 1.5e-3})
    with pytest.raises(pydantic.ValidationError):
        build_config("sync_complete", {"mode_subset": "1-60"})


def test_perturbation_must_fall_on_the_sampled_window():
    base = {"topology": "complete", "n": 8, "phi": 0.0, "horizon": 1.05, "dt_out": 0.1}
    config = build_config("custom", {**base, "perturbation": {"at_time": 1.0, "amplitude": 1.0}})
    assert config.perturbation.at_time == 1.0
    with pytest.raises(pydantic.ValidationError):
        build_config("custom", {**base, "perturbation": {"at_time": 1.02, "amplitude": 1.0}})


def test_mode_subset_accepts_text():
    assert build_config("sync_complete", {"mode_subset": "1-2,50"}).mode_subset == [1, 2, 50]


def test_fingerprint():
    config = build_config("sync_complete")
    assert config.fingerprint() == build_config("sync_complete").fingerprint()
    assert config.fingerprint() != build_config("sync_complete", {"seed": 2}).fingerprint()


def test_load_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"n": 12}), encoding="utf-8")
    assert load_config_file(path) == {"n": 12}
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_config_file(path)
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_config_file(path)


def test_build_coupling_and_state(tmp_path):
    config = build_config("twisted_wave", {"n": 12})
    coupling = build_coupling(config)
    assert coupling.is_circulant and coupling.size == 12
    assert np.allclose(build_initial_state(config).phases, init_twisted(12, 1).phases)

    path = save_coupling_csv(build_ring(6, 1), tmp_path / "ring.csv")
    config = build_config("custom", {"topology": "csv", "coupling_path": str(path), "n": 6, "phi": 0.2,
                                     "row_normalize": True})
    assert np.allclose(build_coupling(config).weights.sum(axis=1), 1.0)

    config = build_config("custom", {"topology": "csv", "coupling_path": str(path), "n": 7, "phi": 0.2})
    with pytest.raises(ValidationError):
        build_coupling(config)


def test_calibrate_epsilon():
    assert calibrate_epsilon(build_complete(50), 1.0) == pytest.approx(0.02, rel=1e-10)
    expected = 1.0 / (2.0 - 2.0 * math.cos(2 * math.pi / 100))
    assert calibrate_epsilon(build_ring(100, 1), 1.0) == pytest.approx(expected, rel=1e-8)


def test_calibrate_perturbation():
    coupling = build_complete(10)
    state0 = init_twisted(10, 1)
    spec = PerturbationSpec(at_time=0.5, amplitude=0.0, seed=1)
    amplitude, reached = calibrate_perturbation(coupling, 1.0, 0.0, state0, spec, dt=1e-2, dt_out=0.1)
    assert (amplitude, reached) == (pytest.approx(math.pi / 4), True)

    amplitude, reached = calibrate_perturbation(coupling, 1.0, 0.0, state0, spec, dt=1e-2, dt_out=0.1,
                                                deadline=1.0, candidates=(0.0,))
    assert (amplitude, reached) == (0.0, False)


def test_coexistence_duration():
    assert coexistence_duration(np.array([0.0, 0.5, 1.0, 0.3]), 1.0) == 2.0


def test_chimera_sweep_uses_the_configured_normalization(monkeypatch):
    seen = []

    def recording_simulate(coupling, *args, **kwargs):
        seen.append(coupling)
        return simulate(coupling, *args, **kwargs)

    monkeypatch.setattr(calibration, "simulate", recording_simulate)
    config = build_config("custom", {"topology": "power_law", "n": 8, "alpha": 1.0, "phi": 1.3,
                                     "row_normalize": True, "horizon": 1.0, "dt": 1e-2, "dt_out": 0.1,
                                     "lock_window": 0.5})
    epsilon, alpha, found = calibration.calibrate_chimera(config, alphas=(2.0,), epsilons=(0.5,), min_duration=10.0)
    assert (epsilon, alpha, found) == (1.0, 1.0, False)
    assert len(seen) == 1
    assert_allclose(seen[0].weights.sum(axis=1), 1.0)
    assert_array_equal(seen[0].weights, calibration.chimera_coupling(config, 2.0).weights)
