import concurrent.futures
import logging
import os
import shutil
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel
from tinydb import Query, TinyDB

from analytic.ensemble import ModeProfile, mode_profile
from analytic.modes import dominant_modes, mode_coefficients
from analytic.reconstruct import first_last_subsets, truncation_errors
from analytic.trajectory import analytic_trajectory
from dynamics.integrator import frequency_trace, simulate
from dynamics.state import Provenance
from helpers.errors import ComparisonFailure, MissingRunFilesError
from helpers.export import (
    read_trajectory_csv,
    write_json,
    write_mode_trace_csv,
    write_order_param_csv,
    write_profile_csv,
    write_spectrum_csv,
    write_trajectory_csv,
)
from observables.comparison import ComparisonReport, circular_error
from observables.locking import frequency_spread, lock_statistics
from observables.order import order_parameter_series
from scenarios.calibration import (
    calibrate_chimera,
    calibrate_epsilon,
    calibrate_perturbation,
    chimera_coupling,
)
from scenarios.config import ScenarioConfig, build_coupling, build_initial_state
from spectral.spectrum import spectrum_for
from spectral.system import assemble_system

# Load environment variables from .env file
load_dotenv(".env")

TOOL_VERSION = "0.1.0"
OUT_DIR = os.getenv("KURALAB_OUT_DIR", "runs")
DATA_DIR = os.getenv("KURALAB_DATA_DIR", "data")
TRUNCATION_TIMES = (5.0, 10.0)

logger = logging.getLogger(__name__)


class RunReport(ComparisonReport):
    """Simulated-vs-analytic comparison plus the scenario's identifiers and headline observables."""

    preset: str
    fingerprint: str
    tolerance: float
    passed: bool
    final_r_sim: float
    final_r_analytic: float
    final_frequency_spread: float
    locked_fraction: List[float]
    dominant_mode_first: int
    dominant_mode_last: int
    truncation: Optional[Dict[str, Dict[str, float]]] = None


class RunRecord(BaseModel):
    """Reproducibility manifest of one completed run."""

    config: ScenarioConfig
    fingerprint: str
    tool_version: str
    output_paths: List[str]
    calibrated_values: Dict[str, Union[float, bool]]
    wall_time: float


def resolve_parameters(config: ScenarioConfig, logger):
    """Coupling, epsilon, initial state and perturbation after any calibration the config asks for."""
    calibrated: Dict[str, Union[float, bool]] = {}
    coupling = build_coupling(config)

    if config.calibrate_chimera and config.topology == "power_law":
        epsilon, alpha, found = calibrate_chimera(config)
        coupling = chimera_coupling(config, alpha)
        calibrated.update({"epsilon": epsilon, "alpha": alpha, "chimera_calibrated": found})
    elif config.epsilon is not None:
        epsilon = config.epsilon
    else:
        epsilon = calibrate_epsilon(coupling, config.gap_target)
        calibrated["epsilon"] = epsilon
    if config.alpha is not None:
        calibrated.setdefault("alpha", config.alpha)

    state0 = build_initial_state(config)
    perturbation = config.perturbation
    if perturbation is not None and config.calibrate_amplitude:
        amplitude, reached = calibrate_perturbation(coupling, epsilon, config.phi, state0, perturbation,
                                                    dt=config.dt, dt_out=config.dt_out)
        perturbation = perturbation.model_copy(update={"amplitude": amplitude})
        calibrated.update({"perturbation_amplitude": amplitude, "perturbation_calibrated": reached})

    logger.info(f"Scenario {config.preset}: N={coupling.size}, epsilon={epsilon:.6g}, phi={config.phi:.6g}")
    return coupling, epsilon, state0, perturbation, calibrated


def _execute(config: ScenarioConfig, run_dir: Path, written: List[Path], logger) -> Tuple[List[Path], Dict]:
    coupling, epsilon, state0, perturbation, calibrated = resolve_parameters(config, logger)
    spectrum = spectrum_for(assemble_system(coupling, epsilon, config.phi))

    # Run the simulated and the analytic path concurrently
    with concurrent.futures.ThreadPoolExecutor(max_workers=2) as executor:
        sim_future = executor.submit(simulate, coupling, epsilon, config.phi, state0, config.horizon,
                                     config.dt, config.dt_out, perturbation)
        analytic_future = executor.submit(analytic_trajectory, coupling, epsilon, config.phi, state0,
                                          config.horizon, config.dt_out, perturbation, config.mode_subset,
                                          config.dt, spectrum)
        concurrent.futures.wait([sim_future, analytic_future])
    simulated = sim_future.result()
    analytic, trace = analytic_future.result()

    comparison = circular_error(simulated, analytic)
    r_sim = order_parameter_series(simulated)
    r_analytic = order_parameter_series(analytic)
    freqs = frequency_trace(simulated, coupling, epsilon, config.phi, config.omega)
    locked = []
    if config.horizon >= config.lock_window:
        locked = lock_statistics(freqs, simulated.sample_times, config.lock_tol, config.lock_window).locked_fraction.tolist()

    truncation = None
    if config.truncation_modes is not None and 2 * config.truncation_modes <= config.n:
        coeffs = mode_coefficients(state0, spectrum)
        times = [t for t in TRUNCATION_TIMES if t <= config.horizon]
        errors = truncation_errors(coeffs, spectrum, times, first_last_subsets(config.n, config.truncation_modes))
        truncation = {name: {f"{t:g}": value for t, value in per_time.items()} for name, per_time in errors.items()}

    dominant = dominant_modes(trace)
    report = RunReport(
        **comparison.model_dump(),
        preset=config.preset,
        fingerprint=config.fingerprint(),
        tolerance=config.tolerance,
        passed=comparison.circular_rmse < config.tolerance,
        final_r_sim=float(r_sim[-1]),
        final_r_analytic=float(r_analytic[-1]),
        final_frequency_spread=float(frequency_spread(freqs)[-1]),
        locked_fraction=locked,
        dominant_mode_first=int(dominant[0]),
        dominant_mode_last=int(dominant[-1]),
        truncation=truncation,
    )
    logger.info(f"Scenario {config.preset}: circular RMSE {comparison.circular_rmse:.4g} rad, "
                f"max |R_sim - R_analytic| {comparison.max_abs_order_param_gap:.4g}, final R_sim {r_sim[-1]:.4f}")

    for path, writer in (
        (run_dir / "phases_sim.csv", lambda p: write_trajectory_csv(simulated, p)),
        (run_dir / "phases_analytic.csv", lambda p: write_trajectory_csv(analytic, p)),
        (run_dir / "order_param.csv", lambda p: write_order_param_csv(simulated.sample_times, r_sim, r_analytic, p)),
        (run_dir / "modes_log10.csv", lambda p: write_mode_trace_csv(trace, p)),
        (run_dir / "report.json", lambda p: write_json(report, p)),
    ):
        written.append(path)
        writer(path)
    return written, calibrated


def store_run_in_db(record: RunRecord, logger, data_dir: Optional[Union[str, Path]] = None) -> bool:
    """Store the run in the TinyDB registry; a re-run of the same config updates its entry instead."""
    data_dir = Path(data_dir or DATA_DIR)
    data_dir.mkdir(parents=True, exist_ok=True)

    db = TinyDB(data_dir / "runs.json")
    Run = Query()
    entry = record.model_dump(mode="json")
    if db.search(Run.fingerprint == record.fingerprint):
        db.update(entry, Run.fingerprint == record.fingerprint)
        logger.info(f"Updated registry entry for {record.config.preset} ({record.fingerprint[:10]})")
        stored = False
    else:
        db.insert(entry)
        logger.info(f"Stored new registry entry for {record.config.preset} ({record.fingerprint[:10]})")
        stored = True
    db.close()
    return stored


def run_scenario(config: ScenarioConfig, logger=logger, out_dir: Optional[Union[str, Path]] = None,
                 data_dir: Optional[Union[str, Path]] = None) -> RunRecord:
    """Simulate, evaluate the analytic solution, measure, and write the run directory plus manifest."""
    started = time.perf_counter()
    fingerprint = config.fingerprint()
    run_dir = Path(out_dir) if out_dir else Path(OUT_DIR) / f"{config.preset}-{fingerprint[:10]}"
    created = not run_dir.exists()
    run_dir.mkdir(parents=True, exist_ok=True)

    written: List[Path] = []
    try:
        written, calibrated = _execute(config, run_dir, written, logger)
        manifest_path = run_dir / "manifest.json"
        written.append(manifest_path)
        record = RunRecord(
            config=config,
            fingerprint=fingerprint,
            tool_version=TOOL_VERSION,
            output_paths=[str(path) for path in written],
            calibrated_values=calibrated,
            wall_time=time.perf_counter() - started,
        )
        write_json(record, manifest_path)
    except Exception as e:
        logger.error(f"Run {config.preset} failed, removing partial outputs: {str(e)}")
        if created:
            shutil.rmtree(run_dir, ignore_errors=True)
        else:
            for path in written:
                path.unlink(missing_ok=True)
        raise

    store_run_in_db(record, logger, data_dir)
    logger.info(f"Run {config.preset} finished in {record.wall_time:.2f} s, outputs in {run_dir}")
    return record


def compare_run(run_dir: Union[str, Path], logger=logger, sim_path: Optional[Union[str, Path]] = None,
                analytic_path: Optional[Union[str, Path]] = None,
                tolerance: Optional[float] = None) -> Tuple[ComparisonReport, float]:
    """Recompute the circular error between a run's trajectories and check it against the stored tolerance.

    Raises ComparisonFailure (after saving the report) when the tolerance is exceeded.
    """
    run_dir = Path(run_dir)
    sim_path = Path(sim_path) if sim_path else run_dir / "phases_sim.csv"
    analytic_path = Path(analytic_path) if analytic_path else run_dir / "phases_analytic.csv"
    manifest_path = run_dir / "manifest.json"

    missing = [str(path) for path in (sim_path, analytic_path) if not path.exists()]
    if missing:
        raise MissingRunFilesError(f"Missing trajectory files: {', '.join(missing)}")
    if tolerance is None:
        if not manifest_path.exists():
            raise MissingRunFilesError(f"No manifest.json in {run_dir} and no tolerance given")
        tolerance = RunRecord.model_validate_json(manifest_path.read_text(encoding="utf-8")).config.tolerance

    report = circular_error(read_trajectory_csv(sim_path, Provenance.SIMULATED),
                            read_trajectory_csv(analytic_path, Provenance.ANALYTIC))
    run_dir.mkdir(parents=True, exist_ok=True)
    write_json(report, run_dir / "compare_report.json")

    logger.info(f"Compared {sim_path.name} with {analytic_path.name}: circular RMSE {report.circular_rmse:.4g} rad")
    if not report.circular_rmse < tolerance:
        raise ComparisonFailure(f"circular RMSE {report.circular_rmse:.4g} rad exceeds tolerance {tolerance:g} rad")
    return report, tolerance


def export_spectrum(config: ScenarioConfig, logger=logger, out_path: Optional[Union[str, Path]] = None) -> Path:
    """Write mode_label, re_lambda, im_lambda, spatial_frequency for the configured coupling and (epsilon, phi)."""
    coupling = build_coupling(config)
    epsilon = config.epsilon if config.epsilon is not None else calibrate_epsilon(coupling, config.gap_target)
    spectrum = spectrum_for(assemble_system(coupling, epsilon, config.phi))
    if out_path is None:
        out_path = Path(OUT_DIR) / f"spectrum-{config.preset}-phi{config.phi:.4f}.csv"
    path = write_spectrum_csv(spectrum, out_path)
    logger.info(f"Spectrum of {config.preset} ({spectrum.source.value}, epsilon={epsilon:.6g}) written to {path}")
    return path


def export_profile(config: ScenarioConfig, phis: Sequence[float], times: Sequence[float], seeds: int,
                   logger=logger, out_path: Optional[Union[str, Path]] = None) -> Tuple[Path, ModeProfile]:
    """Ensemble mode-contribution profile over `seeds` random initial states, per phase lag and time."""
    coupling = build_coupling(config)
    epsilon = config.epsilon if config.epsilon is not None else calibrate_epsilon(coupling, config.gap_target)
    profile = mode_profile(coupling, epsilon, phis, times, range(config.seed, config.seed + seeds), progress=True)
    if out_path is None:
        out_path = Path(OUT_DIR) / f"profile-{config.preset}.csv"
    path = write_profile_csv(profile, out_path)
    for p, phi in enumerate(profile.phis):
        gaps = ", ".join(f"t={t:g}s: {gap:.2f}" for t, gap in zip(profile.times, profile.mean_gap[p]))
        logger.info(f"phi={phi:.4g} dominance gap (decades) {gaps}")
    return path, profile


if __name__ == "__main__":
    from scenarios.config import build_config

    logging.basicConfig(format='%(asctime)s - %(name)s - %(levelname)s - %(message)s', level=logging.INFO)
    run_scenario(build_config("sync_complete"), logging.getLogger(__name__))
