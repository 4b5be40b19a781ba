import logging
import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from tinydb import TinyDB

import lab
from dynamics.state import Provenance, Trajectory
from helpers.errors import AlignmentError, ComparisonFailure, MissingRunFilesError
from helpers.export import read_trajectory_csv, write_trajectory_csv
from scenarios.calibration import chimera_coupling
from scenarios.config import build_config

logger = logging.getLogger(__name__)

RUN_FILES = ["phases_sim.csv", "phases_analytic.csv", "order_param.csv", "modes_log10.csv", "report.json",
             "manifest.json"]


@pytest.fixture
def short_twisted():
    return build_config("twisted_wave", cli_overrides={"horizon": 0.5, "dt_out": 0.05})


@pytest.fixture
def twisted_run(tmp_path, short_twisted):
    run_dir = tmp_path / "run"
    record = lab.run_scenario(short_twisted, logger, out_dir=run_dir, data_dir=tmp_path / "data")
    return run_dir, record


def test_run_scenario_writes_outputs(twisted_run):
    run_dir, record = twisted_run
    for name in RUN_FILES:
        assert (run_dir / name).exists()
    assert record.calibrated_values["epsilon"] == pytest.approx(1.0 / (2.0 - 2.0 * math.cos(2 * math.pi / 100)))
    assert record.fingerprint == record.config.fingerprint()

    order = pd.read_csv(run_dir / "order_param.csv")
    assert list(order.columns) == ["time_s", "R_sim", "R_analytic"]
    assert len(order) == 11
    assert order["R_sim"].max() < 1e-10

    modes = pd.read_csv(run_dir / "modes_log10.csv")
    assert modes.shape == (11, 101)

    report = lab.RunReport.model_validate_json((run_dir / "report.json").read_text(encoding="utf-8"))
    assert report.passed
    assert report.dominant_mode_first == 2


def test_run_outputs_are_deterministic(tmp_path, short_twisted, twisted_run):
    run_dir, _ = twisted_run
    again = tmp_path / "again"
    lab.run_scenario(short_twisted, logger, out_dir=again, data_dir=tmp_path / "data")
    for name in ("phases_sim.csv", "phases_analytic.csv", "order_param.csv", "modes_log10.csv"):
        assert (again / name).read_bytes() == (run_dir / name).read_bytes()

    db = TinyDB(tmp_path / "data" / "runs.json")
    assert len(db) == 1
    db.close()


def test_failed_run_removes_its_directory(tmp_path):
    config = build_config("custom", {"topology": "csv", "coupling_path": str(tmp_path / "missing.csv"),
                                     "n": 5, "phi": 0.0, "horizon": 0.1})
    run_dir = tmp_path / "failed"
    with pytest.raises(FileNotFoundError):
        lab.run_scenario(config, logger, out_dir=run_dir, data_dir=tmp_path / "data")
    assert not run_dir.exists()


def test_compare_run_passes(twisted_run):
    run_dir, record = twisted_run
    report, tolerance = lab.compare_run(run_dir, logger)
    assert tolerance == record.config.tolerance
    assert report.circular_rmse < tolerance
    assert (run_dir / "compare_report.json").exists()


def test_compare_run_against_itself(twisted_run):
    run_dir, _ = twisted_run
    sim = run_dir / "phases_sim.csv"
    report, _ = lab.compare_run(run_dir, logger, sim_path=sim, analytic_path=sim)
    assert report.circular_rmse == 0.0
    assert report.max_abs_order_param_gap == 0.0
    assert set(report.per_time_rmse) == {0.0}


def test_compare_run_failures(tmp_path, twisted_run):
    run_dir, _ = twisted_run
    simulated = read_trajectory_csv(run_dir / "phases_sim.csv")

    shifted = Trajectory(sample_times=simulated.sample_times, states=simulated.states + 0.5,
                         provenance=Provenance.ANALYTIC)
    shifted_path = write_trajectory_csv(shifted, tmp_path / "shifted.csv")
    with pytest.raises(ComparisonFailure):
        lab.compare_run(run_dir, logger, analytic_path=shifted_path)
    assert (run_dir / "compare_report.json").exists()

    narrow = Trajectory(sample_times=simulated.sample_times, states=simulated.states[:, :50],
                        provenance=Provenance.ANALYTIC)
    narrow_path = write_trajectory_csv(narrow, tmp_path / "narrow.csv")
    with pytest.raises(AlignmentError):
        lab.compare_run(run_dir, logger, analytic_path=narrow_path)

    with pytest.raises(MissingRunFilesError):
        lab.compare_run(tmp_path / "nowhere", logger)


def test_export_spectrum(tmp_path):
    path = lab.export_spectrum(build_config("sync_complete"), logger, out_path=tmp_path / "complete.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["mode_label", "re_lambda", "im_lambda", "spatial_frequency"]
    assert len(frame) == 50
    assert np.unique(np.round(frame["re_lambda"], 10)).size == 2

    path = lab.export_spectrum(build_config("twisted_wave"), logger, out_path=tmp_path / "ring.csv")
    assert np.abs(pd.read_csv(path)["im_lambda"]).max() < 1e-12


def test_export_spectrum_rotates_with_phase_lag(tmp_path):
    base = pd.read_csv(lab.export_spectrum(build_config("chimera_130", {"phi": 0.0}), logger,
                                           out_path=tmp_path / "phi0.csv"))
    lagged = pd.read_csv(lab.export_spectrum(build_config("chimera_130"), logger, out_path=tmp_path / "phi130.csv"))
    a = base["re_lambda"].to_numpy() + 1j * base["im_lambda"].to_numpy()
    b = lagged["re_lambda"].to_numpy() + 1j * lagged["im_lambda"].to_numpy()
    assert np.abs(b - a * np.exp(-1.30j)).max() < 1e-12


def test_export_profile(tmp_path):
    config = build_config("custom", {"topology": "complete", "n": 8, "phi": 0.0, "epsilon": 1.0})
    path, profile = lab.export_profile(config, [0.0, 1.0], [1.0, 2.0, 3.0], 4, logger, out_path=tmp_path / "p.csv")
    frame = pd.read_csv(path)
    assert len(frame) == 2 * 3 * 8
    assert list(frame.columns) == ["phi", "time_s", "mode_label", "mean_log10_mu", "std_log10_mu"]
    assert profile.seeds == 4


def _report(run_dir):
    return lab.RunReport.model_validate_json((run_dir / "report.json").read_text(encoding="utf-8"))


def test_sync_complete_reaches_coherence_within_tolerance(tmp_path):
    run_dir = tmp_path / "sync"
    record = lab.run_scenario(build_config("sync_complete"), logger, out_dir=run_dir, data_dir=tmp_path / "data")
    assert record.calibrated_values["epsilon"] == pytest.approx(0.02)
    report = _report(run_dir)
    assert report.passed
    assert report.final_r_sim > 0.99
    assert report.dominant_mode_last == 1

    r_sim = pd.read_csv(run_dir / "order_param.csv")["R_sim"].to_numpy()
    reached = int(np.argmax(r_sim > 0.99))
    assert r_sim[reached] > 0.99
    assert np.all(r_sim[reached:] > 0.99)

    compared, tolerance = lab.compare_run(run_dir, logger)
    assert tolerance == 0.5
    assert compared.circular_rmse == pytest.approx(report.circular_rmse)


def test_twisted_perturbed_transitions_to_synchrony(tmp_path):
    run_dir = tmp_path / "perturbed"
    record = lab.run_scenario(build_config("twisted_perturbed"), logger, out_dir=run_dir,
                              data_dir=tmp_path / "data")
    assert record.calibrated_values["perturbation_calibrated"] is True
    assert record.calibrated_values["perturbation_amplitude"] > math.pi / 2

    order = pd.read_csv(run_dir / "order_param.csv")
    at_ten = np.isclose(order["time_s"], 10.0)
    assert at_ten.sum() == 1
    assert order.loc[at_ten, "R_sim"].item() > 0.99
    assert order["R_sim"].iloc[-1] > 0.99

    modes = pd.read_csv(run_dir / "modes_log10.csv").drop(columns="time_s").to_numpy()
    dominant = modes.argmax(axis=1) + 1
    assert dominant[0] == 2
    assert dominant[-1] == 1
    switched = int(np.argmax(dominant == 1))
    assert np.all(dominant[switched:] == 1)

    report = _report(run_dir)
    assert report.final_frequency_spread < 1e-3


@pytest.mark.parametrize("preset", ["chimera_115", "chimera_130"])
def test_chimera_presets_stay_within_recorded_tolerance(tmp_path, preset):
    run_dir = tmp_path / preset
    lab.run_scenario(build_config(preset), logger, out_dir=run_dir, data_dir=tmp_path / "data")
    report = _report(run_dir)
    assert report.passed
    assert set(report.truncation) == {"first", "last", "first_last"}
    if preset == "chimera_115":
        assert report.locked_fraction[-1] == 1.0


def test_chimera_calibration_runs_the_swept_coupling(monkeypatch):
    monkeypatch.setattr(lab, "calibrate_chimera", lambda config: (0.5, 2.0, True))
    config = build_config("custom", {"topology": "power_law", "n": 8, "alpha": 1.0, "phi": 1.3,
                                     "row_normalize": True, "calibrate_chimera": True})
    coupling, epsilon, _, _, calibrated = lab.resolve_parameters(config, logger)
    assert epsilon == 0.5
    assert calibrated == {"epsilon": 0.5, "alpha": 2.0, "chimera_calibrated": True}
    assert_allclose(coupling.weights.sum(axis=1), 1.0)
    assert_array_equal(coupling.weights, chimera_coupling(config, 2.0).weights)


def test_repulsive_mode_contributions_stay_flat(tmp_path):
    config = build_config("repulsive", cli_overrides={"horizon": 2.0, "dt_out": 0.1})
    lab.run_scenario(config, logger, out_dir=tmp_path / "repulsive", data_dir=tmp_path / "data")
    modes = pd.read_csv(tmp_path / "repulsive" / "modes_log10.csv").drop(columns="time_s").to_numpy()
    assert np.abs(modes - modes[0]).max() < 1e-9
