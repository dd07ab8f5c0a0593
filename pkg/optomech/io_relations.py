"""
Extracavity description: output covariance, its inversion, and a simulated
homodyne estimate of the output covariance.

With equal cavity decay rates kappa and acquisition time t_m the
dimensionless output quadratures satisfy

    V_out = 2 kappa t_m V_ab + I / 2

so the intracavity field-field matrix is recovered as (V_out - I/2) / (2 kappa t_m).

Homodyne model: each shot measures one rotated quadrature per mode,
x_theta = x cos(theta) + y sin(theta), for a fixed phase setting (theta_a, theta_b).
Second moments over a grid of settings are mapped to the ten free entries of
V_out by linear least squares.
"""

import math
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import IllPosedGrid, NegativeDiscriminant, ParameterError
from .gaussian import check_physicality, log_negativity
from .logger import get_logger
from .steady_state import CovarianceMatrix

logger = get_logger("io")

# Free entries of a symmetric 4x4 matrix, in parameter-vector order
FREE_ENTRIES = (
    (0, 0), (0, 1), (1, 1),
    (2, 2), (2, 3), (3, 3),
    (0, 2), (0, 3), (1, 2), (1, 3),
)
N_FREE = len(FREE_ENTRIES)

PHASES = (0.0, math.pi / 4, math.pi / 2)
DEFAULT_PHASE_GRID = tuple(product(PHASES, PHASES))
MIN_SETTINGS = 6

CSV_COLUMNS = ["setting_index", "theta_a", "theta_b", "xa", "xb"]

VACUUM = 0.5 * np.eye(4)


@dataclass(frozen=True)
class MeasurementConfig:
    t_m: float  # s
    kappa: float  # rad/s
    phase_grid: Tuple[Tuple[float, float], ...] = DEFAULT_PHASE_GRID
    samples_per_setting: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase_grid", tuple((float(a), float(b)) for a, b in self.phase_grid))
        if not self.t_m > 0:
            raise ParameterError(f"t_m must be > 0 (got {self.t_m})")
        if not self.kappa > 0:
            raise ParameterError(f"kappa must be > 0 (got {self.kappa})")
        if self.samples_per_setting < 2:
            raise ParameterError("samples_per_setting must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if len(set(self.phase_grid)) != len(self.phase_grid):
            raise IllPosedGrid("phase grid contains repeated settings")
        check_design(self.phase_grid)


@dataclass(frozen=True)
class HomodyneSetting:
    theta_a: float
    theta_b: float
    xa: np.ndarray
    xb: np.ndarray


@dataclass(frozen=True)
class HomodyneSamples:
    settings: Tuple[HomodyneSetting, ...]

    @property
    def thetas(self) -> List[Tuple[float, float]]:
        return [(s.theta_a, s.theta_b) for s in self.settings]


@dataclass(frozen=True)
class EstimatedCM:
    mean: CovarianceMatrix
    stderr: np.ndarray  # 4x4
    parameter_cov: np.ndarray  # 10x10 over FREE_ENTRIES
    condition: float  # of the normal equations
    samples_per_setting: int


@dataclass(frozen=True)
class Reconstruction:
    cm: CovarianceMatrix
    physical: bool
    nu_min: float


def output_cm(V_ab: CovarianceMatrix, kappa: float, t_m: float) -> CovarianceMatrix:
    if not (kappa > 0 and t_m > 0):
        raise ParameterError("kappa and t_m must be positive")
    return CovarianceMatrix(2.0 * kappa * t_m * V_ab.matrix + VACUUM, V_ab.modes)


def reconstruct_intracavity(V_out: CovarianceMatrix, kappa: float, t_m: float) -> Reconstruction:
    """Invert the input-output relation; flags (not raises) a non-physical result."""
    if not kappa * t_m > 0:
        raise ParameterError("kappa * t_m must be positive")
    cm = CovarianceMatrix((V_out.matrix - VACUUM) / (2.0 * kappa * t_m), V_out.modes)
    physical, nu_min = check_physicality(cm)
    if not physical:
        logger.warning(f"reconstructed field-field matrix is not physical (nu_min = {nu_min:.4g})")
    return Reconstruction(cm=cm, physical=physical, nu_min=nu_min)


def _unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def setting_covariance(V_out: CovarianceMatrix, theta_a: float, theta_b: float) -> np.ndarray:
    """2x2 covariance of (x_theta_a, x_theta_b)."""
    M = V_out.matrix
    ua, ub = _unit(theta_a), _unit(theta_b)
    var_a = ua @ M[:2, :2] @ ua
    var_b = ub @ M[2:, 2:] @ ub
    cov = ua @ M[:2, 2:] @ ub
    return np.array([[var_a, cov], [cov, var_b]])


def setting_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def simulate_homodyne(V_out: CovarianceMatrix, config: MeasurementConfig) -> HomodyneSamples:
    """Zero-mean Gaussian shots for every phase setting; deterministic per (seed, setting)."""
    settings = []
    for index, (theta_a, theta_b) in enumerate(config.phase_grid):
        chol = np.linalg.cholesky(setting_covariance(V_out, theta_a, theta_b))
        z = setting_rng(config.seed, index).standard_normal((config.samples_per_setting, 2))
        x = z @ chol.T
        settings.append(HomodyneSetting(theta_a, theta_b, x[:, 0].copy(), x[:, 1].copy()))
    return HomodyneSamples(tuple(settings))


def design_rows(theta_a: float, theta_b: float) -> np.ndarray:
    """Rows mapping the free entries to (<xa^2>, <xb^2>, <xa xb>) at one setting."""
    ca, sa = math.cos(theta_a), math.sin(theta_a)
    cb, sb = math.cos(theta_b), math.sin(theta_b)
    rows = np.zeros((3, N_FREE))
    rows[0, 0:3] = [ca * ca, 2 * ca * sa, sa * sa]
    rows[1, 3:6] = [cb * cb, 2 * cb * sb, sb * sb]
    rows[2, 6:10] = [ca * cb, ca * sb, sa * cb, sa * sb]
    return rows


def design_matrix(thetas: Sequence[Tuple[float, float]]) -> np.ndarray:
    return np.vstack([design_rows(a, b) for a, b in thetas])


def check_design(thetas: Sequence[Tuple[float, float]]) -> np.ndarray:
    if len(set(thetas)) < MIN_SETTINGS:
        raise IllPosedGrid(f"phase grid needs at least {MIN_SETTINGS} distinct settings (got {len(set(thetas))})")
    A = design_matrix(thetas)
    rank = np.linalg.matrix_rank(A)
    if rank < N_FREE:
        raise IllPosedGrid(f"phase grid determines only {rank} of {N_FREE} covariance entries")
    return A


def params_to_matrix(theta: np.ndarray) -> np.ndarray:
    M = np.zeros((4, 4))
    for value, (i, j) in zip(theta, FREE_ENTRIES):
        M[i, j] = M[j, i] = value
    return M


def fit_moments(
    thetas: Sequence[Tuple[float, float]],
    moments: np.ndarray,
    moment_cov: Optional[np.ndarray] = None,
    samples_per_setting: int = 0,
) -> EstimatedCM:
    """
    Least-squares V_out from per-setting second moments (3 per setting).

    moment_cov is the covariance of the stacked moment vector; without it
    the standard errors are zero (noiseless moments).
    """
    A = check_design(thetas)
    moments = np.asarray(moments, dtype=float).reshape(-1)
    normal = A.T @ A
    B = np.linalg.solve(normal, A.T)
    theta_hat = B @ moments
    if moment_cov is None:
        parameter_cov = np.zeros((N_FREE, N_FREE))
    else:
        parameter_cov = B @ moment_cov @ B.T
    stderr = params_to_matrix(np.sqrt(np.clip(np.diag(parameter_cov), 0.0, None)))
    return EstimatedCM(
        mean=CovarianceMatrix(params_to_matrix(theta_hat), ("a", "b")),
        stderr=stderr,
        parameter_cov=parameter_cov,
        condition=float(np.linalg.cond(normal)),
        samples_per_setting=samples_per_setting,
    )


def estimate_cm(samples: HomodyneSamples) -> EstimatedCM:
    """Second moments per setting, least squares, delta-method standard errors."""
    thetas = samples.thetas
    check_design(thetas)
    n_settings = len(samples.settings)
    moments = np.zeros(3 * n_settings)
    moment_cov = np.zeros((3 * n_settings, 3 * n_settings))
    counts = []
    for k, s in enumerate(samples.settings):
        z = np.column_stack([s.xa * s.xa, s.xb * s.xb, s.xa * s.xb])
        m = z.shape[0]
        if m < 2:
            raise IllPosedGrid(f"setting {k} has fewer than two shots")
        counts.append(m)
        moments[3 * k : 3 * k + 3] = z.mean(axis=0)
        # Sample fourth moments give the covariance of the averaged products
        moment_cov[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = np.cov(z, rowvar=False) / m
    estimate = fit_moments(thetas, moments, moment_cov, samples_per_setting=min(counts))
    logger.debug(f"estimated V_out from {n_settings} settings, normal-equation condition {estimate.condition:.3g}")
    return estimate


def _free_params(M: np.ndarray) -> np.ndarray:
    return np.array([M[i, j] for i, j in FREE_ENTRIES])


def log_negativity_stderr(estimate: EstimatedCM, kappa: float, t_m: float) -> Tuple[float, float]:
    """
    Field-field log-negativity of the reconstruction and its delta-method stderr.

    The gradient over the ten free entries is taken by central differences.
    An estimate too noisy to have a real two-mode spectrum gives (nan, inf).
    """
    theta0 = _free_params(estimate.mean.matrix)
    scale = 2.0 * kappa * t_m

    def en(theta: np.ndarray) -> float:
        V_ab = (params_to_matrix(theta) - VACUUM) / scale
        return log_negativity(CovarianceMatrix(V_ab, ("a", "b")))

    try:
        value = en(theta0)
        grad = np.zeros(N_FREE)
        for i in range(N_FREE):
            h = 1e-6 * max(abs(theta0[i]), 1e-3)
            up, down = theta0.copy(), theta0.copy()
            up[i] += h
            down[i] -= h
            grad[i] = (en(up) - en(down)) / (2.0 * h)
    except NegativeDiscriminant:
        logger.warning("estimated field-field matrix has no real symplectic spectrum")
        return math.nan, math.inf
    if not (math.isfinite(value) and np.all(np.isfinite(grad))):
        return value, math.inf
    variance = float(grad @ estimate.parameter_cov @ grad)
    return value, math.sqrt(max(variance, 0.0))


def samples_to_csv(samples: HomodyneSamples, path: Union[str, Path]) -> None:
    frames = []
    for index, s in enumerate(samples.settings):
        frames.append(
            pd.DataFrame(
                {
                    "setting_index": index,
                    "theta_a": s.theta_a,
                    "theta_b": s.theta_b,
                    "xa": s.xa,
                    "xb": s.xb,
                }
            )
        )
    table = pd.concat(frames, ignore_index=True)[CSV_COLUMNS]
    table.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")


def samples_from_csv(path: Union[str, Path]) -> HomodyneSamples:
    table = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in table.columns]
    if missing:
        raise IllPosedGrid(f"sample file lacks columns {missing}")
    settings = []
    for _, group in table.groupby("setting_index", sort=True):
        settings.append(
            HomodyneSetting(
                theta_a=float(group["theta_a"].iloc[0]),
                theta_b=float(group["theta_b"].iloc[0]),
                xa=group["xa"].to_numpy(dtype=float),
                xb=group["xb"].to_numpy(dtype=float),
            )
        )
    return HomodyneSamples(tuple(settings))
