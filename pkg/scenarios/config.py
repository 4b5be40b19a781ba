import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dynamics.initial import init_random, init_twisted
from dynamics.state import GRID_TOLERANCE, PerturbationSpec, PhaseState, sampling_stride
from helpers.errors import LabError, ValidationError
from topology.builders import build_complete, build_power_law, build_ring
from topology.coupling import CouplingMatrix, load_coupling_csv, normalize_rows

logger = logging.getLogger(__name__)

PresetName = Literal["sync_complete", "repulsive", "chimera_115", "chimera_130",
                     "twisted_wave", "twisted_perturbed", "custom"]

PRESETS: Dict[str, Dict[str, Any]] = {
    "sync_complete": {"topology": "complete", "n": 50, "phi": 0.0, "init": "random", "tolerance": 0.5},
    "repulsive": {"topology": "complete", "n": 50, "phi": math.pi / 2, "init": "random", "tolerance": 0.05},
    "chimera_115": {"topology": "power_law", "n": 225, "alpha": 1.0, "epsilon": 1.0, "phi": 1.15,
                    "init": "random", "truncation_modes": 10, "tolerance": 1.8},
    "chimera_130": {"topology": "power_law", "n": 225, "alpha": 1.0, "epsilon": 1.0, "phi": 1.30,
                    "init": "random", "truncation_modes": 10, "tolerance": 1.8},
    "twisted_wave": {"topology": "ring", "n": 100, "ring_k": 1, "phi": 0.0, "init": "twisted", "twist_q": 1,
                     "tolerance": 0.05},
    "twisted_perturbed": {"topology": "ring", "n": 100, "ring_k": 1, "phi": 0.0, "init": "twisted", "twist_q": 1,
                          "perturbation": {"at_time": 2.0, "amplitude": math.pi / 2, "seed": 2},
                          "calibrate_amplitude": True, "tolerance": 0.1},
    "custom": {},
}


def parse_mode_subset(text: str) -> List[int]:
    """'1-10,216-225' -> [1, ..., 10, 216, ..., 225]."""
    labels = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            low, high = (int(bound) for bound in part.split("-", 1))
            if high < low:
                raise ValueError(f"Descending mode range {part!r}")
            labels.extend(range(low, high + 1))
        else:
            labels.append(int(part))
    if not labels:
        raise ValueError(f"Empty mode subset {text!r}")
    return sorted(set(labels))


class ScenarioConfig(BaseModel):
    """Full description of one experiment; serialized verbatim into the run manifest."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: PresetName = "custom"
    topology: Literal["complete", "ring", "power_law", "csv"]
    n: int = Field(ge=2)
    epsilon: Optional[float] = Field(default=None, gt=0)
    gap_target: float = Field(default=1.0, gt=0)
    phi: float
    alpha: Optional[float] = Field(default=None, ge=0)
    ring_k: Optional[int] = Field(default=None, ge=1)
    coupling_path: Optional[str] = None
    row_normalize: bool = False
    init: Literal["random", "twisted"] = "random"
    twist_q: Optional[int] = None
    omega: float = 0.0
    dt: float = Field(default=1e-3, gt=0)
    dt_out: float = Field(default=1e-2, gt=0)
    horizon: float = Field(default=20.0, gt=0)
    seed: int = 1
    perturbation: Optional[PerturbationSpec] = None
    calibrate_amplitude: bool = False
    calibrate_chimera: bool = False
    mode_subset: Optional[List[int]] = None
    truncation_modes: Optional[int] = Field(default=None, ge=1)
    tolerance: float = Field(default=0.1, gt=0)
    lock_tol: float = Field(default=1e-2, gt=0)
    lock_window: float = Field(default=1.0, gt=0)

    @field_validator("mode_subset", mode="before")
    @classmethod
    def _parse_subset(cls, value):
        if isinstance(value, str):
            return parse_mode_subset(value)
        return value

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.topology == "ring" and self.ring_k is None:
            raise ValueError("Ring topology needs ring_k")
        if self.topology == "power_law" and self.alpha is None:
            raise ValueError("Power-law topology needs alpha")
        if self.topology == "csv" and not self.coupling_path:
            raise ValueError("CSV topology needs coupling_path")
        if self.init == "twisted" and self.twist_q is None:
            raise ValueError("Twisted initial state needs twist_q")
        if self.horizon < self.dt_out:
            raise ValueError(f"horizon {self.horizon} is shorter than dt_out {self.dt_out}")
        try:
            sampling_stride(self.dt, self.dt_out)
        except LabError as error:
            raise ValueError(str(error)) from error
        last_sample = math.floor(self.horizon / self.dt_out + GRID_TOLERANCE) * self.dt_out
        if self.perturbation is not None and not 0 <= self.perturbation.at_time <= last_sample:
            raise ValueError(f"Perturbation time {self.perturbation.at_time} lies outside the sampled window "
                             f"[0, {last_sample:g}] s")
        if self.mode_subset is not None and (min(self.mode_subset) < 1 or max(self.mode_subset) > self.n):
            raise ValueError(f"Mode labels must lie in 1..{self.n}")
        return self

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as error:
        raise ValidationError(f"Config file {path} is not valid JSON: {error}") from error
    if not isinstance(data, dict):
        raise ValidationError(f"Config file {path} must hold a single JSON object")
    return data


def build_config(preset: str, file_overrides: Optional[Dict[str, Any]] = None,
                 cli_overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """Preset defaults, then the config file, then explicit command-line values."""
    if preset not in PRESETS:
        raise ValidationError(f"Unknown preset {preset!r}; choose one of {', '.join(PRESETS)}")
    data: Dict[str, Any] = dict(PRESETS[preset])
    data.update(file_overrides or {})
    data.update({key: value for key, value in (cli_overrides or {}).items() if value is not None})
    data["preset"] = preset
    return ScenarioConfig.model_validate(data)


def build_coupling(config: ScenarioConfig) -> CouplingMatrix:
    if config.topology == "complete":
        coupling = build_complete(config.n)
    elif config.topology == "ring":
        coupling = build_ring(config.n, config.ring_k)
    elif config.topology == "power_law":
        coupling = build_power_law(config.n, config.alpha)
    else:
        coupling = load_coupling_csv(config.coupling_path)
        if coupling.size != config.n:
            raise ValidationError(f"Coupling file has N={coupling.size} but the config says n={config.n}")
    if config.row_normalize:
        coupling = normalize_rows(coupling)
    return coupling


def build_initial_state(config: ScenarioConfig) -> PhaseState:
    if config.init == "twisted":
        return init_twisted(config.n, config.twist_q, omega=config.omega)
    return init_random(config.n, config.seed, omega=config.omega)
