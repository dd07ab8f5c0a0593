"""
Parameter files.

JSON documents are validated with pydantic models and turned into the
immutable model types. Keys ending in `_over_2pi` carry values in Hz and are
converted to rad/s under the key without the suffix.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy import constants as sc

from .errors import ConfigError
from .logger import get_logger
from .model import CavityLabel, CavityParams, MirrorParams, PhysicalConstants, SystemParams

logger = get_logger("config")

HZ_SUFFIX = "_over_2pi"

ModelT = TypeVar("ModelT", bound=BaseModel)


def convert_hz_keys(data: Any) -> Any:
    """Replace every `<name>_over_2pi` key by `<name>` = 2 pi * value."""
    if not isinstance(data, dict):
        return data
    converted: Dict[str, Any] = {}
    for key, value in data.items():
        if not key.endswith(HZ_SUFFIX):
            converted[key] = value
            continue
        base = key[: -len(HZ_SUFFIX)]
        if base in data:
            raise ValueError(f"both '{base}' and '{key}' given")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"'{key}' must be a number")
        converted[base] = 2.0 * math.pi * value
    return converted


class _ConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    @model_validator(mode="before")
    @classmethod
    def _hz_to_rad_s(cls, data: Any) -> Any:
        return convert_hz_keys(data)


class ConstantsConfig(_ConfigModel):
    hbar: float = Field(default=sc.hbar, gt=0)
    k_B: float = Field(default=sc.k, gt=0)


class CavityConfig(_ConfigModel):
    omega_laser: float = Field(gt=0, description="rad/s")
    omega_cavity: Optional[float] = Field(default=None, gt=0, description="rad/s, defaults to omega_laser")
    length: float = Field(gt=0, description="m")
    kappa: float = Field(gt=0, description="rad/s")
    power: float = Field(ge=0, description="W")
    detuning: float = Field(default=0.0, description="effective detuning, rad/s")

    def to_params(self, label: CavityLabel) -> CavityParams:
        return CavityParams(
            label=label,
            omega_laser=self.omega_laser,
            length=self.length,
            kappa=self.kappa,
            power=self.power,
            detuning_effective=self.detuning,
            omega_cavity=self.omega_cavity,
        )


class MirrorConfig(_ConfigModel):
    omega_m: float = Field(gt=0, description="rad/s")
    gamma_m: float = Field(gt=0, description="rad/s")
    mass: float = Field(gt=0, description="kg")
    temperature: float = Field(ge=0, description="K")

    def to_params(self) -> MirrorParams:
        return MirrorParams(
            omega_m=self.omega_m, gamma_m=self.gamma_m, mass=self.mass, temperature=self.temperature
        )


class ParameterFile(_ConfigModel):
    """`{constants?, cavity_a, cavity_b, mirror}`"""

    constants: ConstantsConfig = Field(default_factory=ConstantsConfig)
    cavity_a: CavityConfig
    cavity_b: CavityConfig
    mirror: MirrorConfig

    def to_system(self) -> SystemParams:
        return SystemParams(
            cavity_a=self.cavity_a.to_params(CavityLabel.A),
            cavity_b=self.cavity_b.to_params(CavityLabel.B),
            mirror=self.mirror.to_params(),
            constants=PhysicalConstants(hbar=self.constants.hbar, k_B=self.constants.k_B),
        )


class IntegratorSettings(_ConfigModel):
    dt: float = Field(gt=0)
    t_total: float = Field(gt=0, description="includes burn-in")
    burn_in: Optional[float] = Field(default=None, gt=0, description="defaults to 10 / margin")
    n_trajectories: int = Field(default=2000, ge=2)
    n_batches: int = Field(default=20, ge=2)
    sample_every: int = Field(default=1, ge=1)


class DeskConfig(_ConfigModel):
    """Scaled rates (omega_m ~ 1) for the stochastic cross-check."""

    omega_m: float = Field(gt=0)
    gamma_m: float = Field(gt=0)
    nbar: float = Field(ge=0)
    kappa_a: float = Field(gt=0)
    kappa_b: float = Field(gt=0)
    delta_a: float = 0.0
    delta_b: float = 0.0
    g_a: float = 0.0
    g_b: float = 0.0
    integrator: IntegratorSettings


SweepVariable = Literal["delta_a", "delta_b", "p_a", "p_b"]
SweepUnit = Literal["omega_m", "kappa_a", "rad_s", "p_a", "W"]


class AxisConfig(_ConfigModel):
    variable: SweepVariable
    range: Optional[Tuple[float, float]] = None
    values: Optional[List[float]] = None
    points: int = Field(default=2, ge=1)
    unit: SweepUnit

    @model_validator(mode="after")
    def _range_or_values(self) -> "AxisConfig":
        if (self.range is None) == (self.values is None):
            raise ValueError("give exactly one of 'range' and 'values'")
        return self


class SweepFile(_ConfigModel):
    """Sweep description for `--sweep`: an x axis, an optional y axis and fixed overrides."""

    x: AxisConfig
    y: Optional[AxisConfig] = None
    fixed: Dict[SweepVariable, float] = Field(default_factory=dict)
    fixed_unit: Dict[SweepVariable, SweepUnit] = Field(default_factory=dict)


def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def load_model(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """Read a JSON file into `model`; every failure becomes a ConfigError."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read file ({e.strerror})") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {_format_validation_error(e)}") from e


def load_parameters(path: Union[str, Path]) -> SystemParams:
    params = load_model(path, ParameterFile).to_system()
    logger.debug(f"loaded parameters from {path}")
    return params


def load_desk(path: Union[str, Path]) -> DeskConfig:
    return load_model(path, DeskConfig)


def load_sweep(path: Union[str, Path]) -> SweepFile:
    return load_model(path, SweepFile)
