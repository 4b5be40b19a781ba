"""CSV and JSON writers/readers for run outputs."""
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from analytic.ensemble import ModeProfile
from analytic.modes import ModeTrace
from dynamics.state import Provenance, Trajectory
from helpers.errors import AlignmentError
from spectral.spectrum import Spectrum

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {path}")
    return path


def write_trajectory_csv(trajectory: Trajectory, path: PathLike) -> Path:
    """time_s, then theta_0 .. theta_{N-1} wrapped into (-pi, pi]."""
    columns = [f"theta_{j}" for j in range(trajectory.size)]
    frame = pd.DataFrame(trajectory.wrapped, columns=columns)
    frame.insert(0, "time_s", trajectory.sample_times)
    return _write(frame, path)


def read_trajectory_csv(path: PathLike, provenance: Provenance = Provenance.SIMULATED) -> Trajectory:
    frame = pd.read_csv(path)
    if "time_s" not in frame.columns:
        raise AlignmentError(f"{path} has no time_s column")
    states = frame.drop(columns="time_s").to_numpy(dtype=float)
    return Trajectory(sample_times=frame["time_s"].to_numpy(dtype=float), states=states, provenance=provenance)


def write_order_param_csv(sample_times, r_sim, r_analytic, path: PathLike) -> Path:
    frame = pd.DataFrame({"time_s": sample_times, "R_sim": r_sim, "R_analytic": r_analytic})
    return _write(frame, path)


def write_mode_trace_csv(trace: ModeTrace, path: PathLike) -> Path:
    """time_s, then log10|mu_1| .. log10|mu_N|."""
    columns = [f"log10_mu_{k}" for k in range(1, trace.log_mu.shape[1] + 1)]
    frame = pd.DataFrame(trace.log10_mu, columns=columns)
    frame.insert(0, "time_s", trace.sample_times)
    return _write(frame, path)


def write_spectrum_csv(spectrum: Spectrum, path: PathLike) -> Path:
    frequency = spectrum.spatial_frequency
    frame = pd.DataFrame({
        "mode_label": spectrum.labels,
        "re_lambda": spectrum.eigenvalues.real,
        "im_lambda": spectrum.eigenvalues.imag,
        "spatial_frequency": pd.array(frequency if frequency is not None else [None] * spectrum.size, dtype="Int64"),
    })
    return _write(frame, path)


def write_profile_csv(profile: ModeProfile, path: PathLike) -> Path:
    """Long format: phi, time_s, mode_label, mean_log10_mu, std_log10_mu."""
    n_phi, n_time, n_mode = profile.mean_log10.shape
    phi, time, mode = np.meshgrid(profile.phis, profile.times, np.arange(1, n_mode + 1), indexing="ij")
    frame = pd.DataFrame({
        "phi": phi.ravel(),
        "time_s": time.ravel(),
        "mode_label": mode.ravel(),
        "mean_log10_mu": profile.mean_log10.ravel(),
        "std_log10_mu": profile.std_log10.ravel(),
    })
    return _write(frame, path)


def write_json(model: BaseModel, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
