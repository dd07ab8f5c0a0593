"""
JSON reports written by the CLI.

The pydantic models are the output schema; `python main.py schema <kind>`
prints it.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .gaussian import EntanglementReport
from .model import PerCavity
from .steady_state import CovarianceMatrix, OperatingPoint

Matrix = List[List[float]]


def matrix_to_list(values) -> Matrix:
    array = values.matrix if isinstance(values, CovarianceMatrix) else np.asarray(values, dtype=float)
    return [[float(v) for v in row] for row in array]


class CavityPair(BaseModel):
    a: float
    b: float

    @classmethod
    def of(cls, values: PerCavity) -> "CavityPair":
        return cls(a=float(values.a), b=float(values.b))


class DerivedModel(BaseModel):
    g0: CavityPair = Field(description="single-photon coupling, rad/s")
    drive_amp: CavityPair = Field(description="|E_j|, 1/s")
    alpha_s: CavityPair
    g_eff: CavityPair = Field(description="rad/s")
    nbar: float
    q_s: float


class WorkingPoint(BaseModel):
    delta_a: float = Field(description="effective detuning, rad/s")
    delta_b: float = Field(description="effective detuning, rad/s")
    p_a: float = Field(description="W")
    p_b: float = Field(description="W")
    omega_m: float = Field(description="rad/s")
    kappa_a: float = Field(description="rad/s")
    kappa_b: float = Field(description="rad/s")


class StabilityModel(BaseModel):
    stable: bool
    margin: float = Field(description="-max Re(lambda), rad/s")
    C1: float
    C2: float
    char_poly: List[float] = Field(description="det(lambda I - K / poly_scale), highest power first")
    hurwitz_minors: List[float]
    hurwitz_stable: bool
    poly_scale: float


class PairModel(BaseModel):
    nu_minus: float
    log_neg: float


class EntanglementModel(BaseModel):
    pairs: Dict[str, PairModel] = Field(description="keyed am, bm, ab")
    tripartite_npt: Dict[str, bool] = Field(description="keyed by the transposed mode")
    fully_inseparable: bool
    field_witness: bool

    @classmethod
    def of(cls, report: EntanglementReport) -> "EntanglementModel":
        return cls(
            pairs={
                "".join(pair): PairModel(nu_minus=r.nu_minus, log_neg=r.log_neg)
                for pair, r in report.pair_results.items()
            },
            tripartite_npt=dict(report.tripartite_npt),
            fully_inseparable=report.fully_inseparable,
            field_witness=report.field_witness,
        )


class PointReport(BaseModel):
    working_point: WorkingPoint
    derived: DerivedModel
    drift: Matrix
    noise: Matrix
    stability: StabilityModel
    covariance: Optional[Matrix] = Field(default=None, description="null when unstable")
    lyapunov_residual: Optional[float] = None
    physical: Optional[bool] = None
    nu_min: Optional[float] = None
    entanglement: Optional[EntanglementModel] = None

    @classmethod
    def of(
        cls,
        point: OperatingPoint,
        entanglement: Optional[EntanglementReport],
        physical: Optional[bool],
        nu_min: Optional[float],
    ) -> "PointReport":
        params, derived, report = point.params, point.derived, point.stability
        return cls(
            working_point=WorkingPoint(
                delta_a=params.cavity_a.detuning_effective,
                delta_b=params.cavity_b.detuning_effective,
                p_a=params.cavity_a.power,
                p_b=params.cavity_b.power,
                omega_m=params.mirror.omega_m,
                kappa_a=params.cavity_a.kappa,
                kappa_b=params.cavity_b.kappa,
            ),
            derived=DerivedModel(
                g0=CavityPair.of(derived.g0),
                drive_amp=CavityPair.of(derived.drive_amp),
                alpha_s=CavityPair.of(derived.alpha_s),
                g_eff=CavityPair.of(derived.g_eff),
                nbar=derived.nbar,
                q_s=derived.q_s,
            ),
            drift=matrix_to_list(point.drift.entries),
            noise=matrix_to_list(point.noise.entries),
            stability=StabilityModel(
                stable=report.stable,
                margin=report.margin,
                C1=report.c1,
                C2=report.c2,
                char_poly=[float(c) for c in report.char_poly],
                hurwitz_minors=[float(m) for m in report.hurwitz_minors],
                hurwitz_stable=report.hurwitz_stable,
                poly_scale=report.poly_scale,
            ),
            covariance=matrix_to_list(point.covariance) if point.covariance is not None else None,
            lyapunov_residual=point.residual,
            physical=physical,
            nu_min=nu_min,
            entanglement=EntanglementModel.of(entanglement) if entanglement is not None else None,
        )


class ReconstructionReport(BaseModel):
    t_m: float = Field(description="s")
    kappa: float = Field(description="rad/s")
    samples_per_setting: int
    seed: int
    phase_grid: List[Tuple[float, float]]
    v_ab_true: Matrix
    v_ab_estimate: Matrix
    v_ab_stderr: Matrix
    v_out_true: Matrix
    v_out_estimate: Matrix
    v_out_stderr: Matrix
    condition: float = Field(description="condition number of the normal equations")
    en_true: float
    en_estimate: Optional[float] = Field(description="null when the estimate has no real spectrum")
    en_stderr: Optional[float] = Field(description="null when unbounded")
    physical: bool
    nu_min: float
    within_band: bool = Field(description="|en_estimate - en_true| <= 3 en_stderr")
    low_confidence: bool
    passed: bool


class OracleReport(BaseModel):
    omega_m: float
    gamma_m: float
    nbar: float
    kappa: Tuple[float, float]
    delta: Tuple[float, float]
    g_eff: Tuple[float, float]
    dt: float
    t_total: float
    n_trajectories: int
    n_samples: int
    seed: int
    lyapunov: Matrix
    ensemble: Matrix
    ensemble_stderr: Matrix
    distance: float = Field(description="relative Frobenius distance")
    tolerance: float
    passed: bool


SCHEMAS = {
    "point": PointReport,
    "reconstruction": ReconstructionReport,
    "oracle": OracleReport,
}
