"""
Parameter sweeps over detunings and powers.

A sweep has an x axis, an optional y axis and fixed overrides. Points are
evaluated in parallel and always returned in grid order (y outer, x inner).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .dynamics import StabilityReport
from .errors import UsageError
from .gaussian import EntanglementReport, check_physicality, entanglement_report
from .logger import get_logger, log_execution_time
from .model import SystemParams, with_overrides
from .parameters import AxisConfig, SweepFile
from .steady_state import steady_state_at

logger = get_logger("sweeps")

DETUNINGS = ("delta_a", "delta_b")
POWERS = ("p_a", "p_b")
VARIABLES = DETUNINGS + POWERS

UNITS = {
    "omega_m": DETUNINGS,
    "kappa_a": DETUNINGS,
    "rad_s": DETUNINGS,
    "p_a": POWERS,
    "W": POWERS,
}

AXIS_COLUMNS = ["delta_a", "delta_b", "abs_delta_b_over_omega_m", "p_a", "p_b"]
STABILITY_COLUMNS = AXIS_COLUMNS + ["C1", "C2", "margin", "stable"]
NEGATIVITY_COLUMNS = AXIS_COLUMNS + [
    "stable",
    "En_am",
    "En_bm",
    "En_ab",
    "nu_minus_am",
    "nu_minus_bm",
    "nu_minus_ab",
]
TRIPARTITE_COLUMNS = AXIS_COLUMNS + ["stable", "npt_a", "npt_b", "npt_m", "fully_inseparable", "field_witness"]

PAIR_KEYS = {("a", "m"): "am", ("b", "m"): "bm", ("a", "b"): "ab"}


def unit_scale(unit: str, variable: str, params: SystemParams) -> float:
    """Multiplier taking a value in `unit` to rad/s or W."""
    if variable not in VARIABLES:
        raise UsageError(f"unknown sweep variable {variable!r}; choose from {VARIABLES}")
    if unit not in UNITS:
        raise UsageError(f"unknown unit {unit!r}; choose from {tuple(UNITS)}")
    if variable not in UNITS[unit]:
        raise UsageError(f"unit {unit!r} does not apply to {variable}")
    return {
        "omega_m": params.mirror.omega_m,
        "kappa_a": params.cavity_a.kappa,
        "rad_s": 1.0,
        "p_a": params.cavity_a.power,
        "W": 1.0,
    }[unit]


@dataclass(frozen=True)
class SweepAxis:
    variable: str
    values: Tuple[float, ...]  # rad/s or W
    unit: str = "rad_s"
    scale: float = 1.0  # values / scale are in `unit`

    @classmethod
    def from_range(
        cls, variable: str, lo: float, hi: float, points: int, unit: str, params: SystemParams
    ) -> "SweepAxis":
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise UsageError(f"{variable} range must be finite")
        if lo > hi:
            raise UsageError(f"empty {variable} range [{lo:g}, {hi:g}]")
        scale = unit_scale(unit, variable, params)
        if lo == hi:
            return cls(variable, (lo * scale,), unit, scale)
        if points < 2:
            raise UsageError(f"{variable} range needs at least 2 points (got {points})")
        values = tuple(float(v) * scale for v in np.linspace(lo, hi, points))
        return cls(variable, values, unit, scale)

    @classmethod
    def from_values(
        cls, variable: str, values: Sequence[float], unit: str, params: SystemParams
    ) -> "SweepAxis":
        if not values:
            raise UsageError(f"empty {variable} value list")
        if not all(math.isfinite(v) for v in values):
            raise UsageError(f"{variable} values must be finite")
        scale = unit_scale(unit, variable, params)
        return cls(variable, tuple(float(v) * scale for v in values), unit, scale)

    @property
    def display(self) -> np.ndarray:
        return np.asarray(self.values) / self.scale if self.scale else np.asarray(self.values)

    @property
    def label(self) -> str:
        symbol = {"delta_a": "Δ_a", "delta_b": "Δ_b", "p_a": "P_a", "p_b": "P_b"}[self.variable]
        unit = {"omega_m": "ω_m", "kappa_a": "κ_a", "rad_s": "rad/s", "p_a": "P_a", "W": "W"}[self.unit]
        return f"{symbol} / {unit}" if self.unit in ("omega_m", "kappa_a", "p_a") else f"{symbol} [{unit}]"


@dataclass(frozen=True)
class SweepSpec:
    x: SweepAxis
    y: Optional[SweepAxis] = None
    fixed: Mapping[str, float] = field(default_factory=dict)  # rad/s or W

    def __post_init__(self):
        if self.y is not None and self.y.variable == self.x.variable:
            raise UsageError(f"both axes sweep {self.x.variable}")
        for name in self.fixed:
            if name not in VARIABLES:
                raise UsageError(f"unknown fixed variable {name!r}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.y.values) if self.y else 1, len(self.x.values))

    def grid(self) -> List[Dict[str, float]]:
        """Override dicts in grid order: y outer, x inner."""
        y_values = self.y.values if self.y else (None,)
        points = []
        for y in y_values:
            for x in self.x.values:
                overrides = dict(self.fixed)
                overrides[self.x.variable] = x
                if self.y is not None:
                    overrides[self.y.variable] = y
                points.append(overrides)
        return points


PRESETS = ("stability-map", "backaction", "extended", "pump-detuning")


def preset(name: str, params: SystemParams, points: int, x_range: Optional[Tuple[float, float]] = None) -> SweepSpec:
    """
    Named sweeps.

    stability-map:  delta_b in [-1.5, 1.5] kappa_a  x  p_b in [0, 0.95] P_a
    backaction:     delta_b in [-3, 0] omega_m      x  p_b in {0, .25, .5, .75, 1} P_a
    extended:       delta_b in [-8, 0] omega_m      x  p_b in {0, 0.15, 0.6} P_a
    pump-detuning:  delta_a in [0.5, 1.5] omega_m   with p_b = 0

    x_range replaces the x range, in the preset's x unit.
    """
    if name == "stability-map":
        lo, hi = x_range or (-1.5, 1.5)
        x = SweepAxis.from_range("delta_b", lo, hi, points, "kappa_a", params)
        y = SweepAxis.from_range("p_b", 0.0, 0.95, points, "p_a", params)
        return SweepSpec(x=x, y=y)
    if name == "backaction":
        lo, hi = x_range or (-3.0, 0.0)
        x = SweepAxis.from_range("delta_b", lo, hi, points, "omega_m", params)
        y = SweepAxis.from_values("p_b", [0.0, 0.25, 0.5, 0.75, 1.0], "p_a", params)
        return SweepSpec(x=x, y=y)
    if name == "extended":
        lo, hi = x_range or (-8.0, 0.0)
        x = SweepAxis.from_range("delta_b", lo, hi, points, "omega_m", params)
        y = SweepAxis.from_values("p_b", [0.0, 0.15, 0.6], "p_a", params)
        return SweepSpec(x=x, y=y)
    if name == "pump-detuning":
        lo, hi = x_range or (0.5, 1.5)
        x = SweepAxis.from_range("delta_a", lo, hi, points, "omega_m", params)
        return SweepSpec(x=x, fixed={"p_b": 0.0})
    raise UsageError(f"unknown preset {name!r}; choose from {PRESETS}")


def _axis_from_config(axis: AxisConfig, params: SystemParams) -> SweepAxis:
    if axis.values is not None:
        return SweepAxis.from_values(axis.variable, axis.values, axis.unit, params)
    lo, hi = axis.range
    return SweepAxis.from_range(axis.variable, lo, hi, axis.points, axis.unit, params)


def spec_from_file(sweep: SweepFile, params: SystemParams) -> SweepSpec:
    fixed = {}
    for name, value in sweep.fixed.items():
        unit = sweep.fixed_unit.get(name, "rad_s" if name in DETUNINGS else "W")
        fixed[name] = value * unit_scale(unit, name, params)
    return SweepSpec(
        x=_axis_from_config(sweep.x, params),
        y=_axis_from_config(sweep.y, params) if sweep.y is not None else None,
        fixed=fixed,
    )


# ============================================
# GRID EVALUATION
# ============================================


@dataclass(frozen=True)
class GridPoint:
    params: SystemParams
    stability: StabilityReport
    entanglement: Optional[EntanglementReport]
    residual: Optional[float]
    nu_min: Optional[float]

    @property
    def stable(self) -> bool:
        return self.stability.stable


def evaluate_point(params: SystemParams, overrides: Mapping[str, float], entanglement: bool = True) -> GridPoint:
    local = with_overrides(params, **overrides)
    point = steady_state_at(local)
    report = None
    nu_min = None
    if point.covariance is not None:
        physical, nu_min = check_physicality(point.covariance)
        if not physical:
            logger.warning(f"non-physical covariance at {dict(overrides)} (nu_min = {nu_min:.6g})")
        if entanglement:
            report = entanglement_report(point.covariance)
    return GridPoint(
        params=local,
        stability=point.stability,
        entanglement=report,
        residual=point.residual,
        nu_min=nu_min,
    )


@log_execution_time()
def evaluate_grid(
    params: SystemParams,
    spec: SweepSpec,
    workers: int = 1,
    entanglement: bool = True,
) -> List[GridPoint]:
    grid = spec.grid()
    logger.info(f"evaluating {len(grid)} grid points on {workers} worker(s)", extra={"grid_points": len(grid)})
    if workers <= 1:
        return [evaluate_point(params, overrides, entanglement) for overrides in grid]

    results: List[Optional[GridPoint]] = [None] * len(grid)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {
            executor.submit(evaluate_point, params, overrides, entanglement): index
            for index, overrides in enumerate(grid)
        }
        for future, index in future_to_index.items():
            results[index] = future.result()
    return results


# ============================================
# ROWS AND CSV
# ============================================


def _axis_values(point: GridPoint) -> Dict[str, float]:
    a, b = point.params.cavity_a, point.params.cavity_b
    return {
        "delta_a": a.detuning_effective,
        "delta_b": b.detuning_effective,
        "abs_delta_b_over_omega_m": abs(b.detuning_effective) / point.params.mirror.omega_m,
        "p_a": a.power,
        "p_b": b.power,
    }


def stability_row(point: GridPoint) -> Dict[str, object]:
    row = _axis_values(point)
    row.update(
        C1=point.stability.c1,
        C2=point.stability.c2,
        margin=point.stability.margin,
        stable=point.stable,
    )
    return row


def negativity_row(point: GridPoint, log2: bool = False) -> Dict[str, object]:
    row = _axis_values(point)
    row["stable"] = point.stable
    report = point.entanglement
    divisor = math.log(2.0) if log2 else 1.0
    for pair, key in PAIR_KEYS.items():
        result = report.pair_results[pair] if report else None
        row[f"En_{key}_log2" if log2 else f"En_{key}"] = result.log_neg / divisor if result else None
    for pair, key in PAIR_KEYS.items():
        result = report.pair_results[pair] if report else None
        row[f"nu_minus_{key}"] = result.nu_minus if result else None
    return row


def tripartite_row(point: GridPoint) -> Dict[str, object]:
    row = _axis_values(point)
    row["stable"] = point.stable
    report = point.entanglement
    for mode in ("a", "b", "m"):
        row[f"npt_{mode}"] = report.tripartite_npt[mode] if report else None
    row["fully_inseparable"] = report.fully_inseparable if report else None
    row["field_witness"] = report.field_witness if report else None
    return row


def negativity_columns(log2: bool = False) -> List[str]:
    if not log2:
        return list(NEGATIVITY_COLUMNS)
    return [f"{c}_log2" if c.startswith("En_") else c for c in NEGATIVITY_COLUMNS]


def _format_bool(value: object) -> object:
    if pd.isna(value):
        return None
    return "true" if value else "false"


def rows_to_frame(rows: Sequence[Mapping[str, object]], columns: Sequence[str]) -> pd.DataFrame:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    for column in frame.columns:
        values = [v for v in frame[column] if pd.notna(v)]
        if values and all(isinstance(v, (bool, np.bool_)) for v in values):
            frame[column] = [_format_bool(v) for v in frame[column]]
    return frame


def write_csv(rows: Sequence[Mapping[str, object]], columns: Sequence[str], path: Union[str, Path]) -> Path:
    """RFC 4180 CSV, '.' decimal, 12 significant digits, empty fields for missing values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_to_frame(rows, columns).to_csv(
        path, index=False, float_format="%.12g", na_rep="", lineterminator="\n"
    )
    return path
