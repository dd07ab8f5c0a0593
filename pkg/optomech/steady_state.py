"""
Stationary covariance matrix of the linearized dynamics.

Solves K V + V K^T + N = 0 by vectorization. The kernel and noise are first
divided by the largest kernel entry; the equation is homogeneous in that
scale, and the 36x36 system is far better conditioned in those units.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, linalg

from .dynamics import DriftMatrix, NoiseMatrix, StabilityReport, build_drift, build_noise, stability
from .errors import SingularSystem, UnknownMode, UnstableSystem
from .logger import get_logger
from .model import DerivedQuantities, SystemParams, derive

logger = get_logger("steady_state")

MODE_ORDER = ("a", "b", "m")
SYMMETRY_RTOL = 1e-12
RESIDUAL_WARN = 1e-10
MAX_CONDITION = 1e14


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetrized quadrature second moments; vacuum variance is 1/2."""

    matrix: np.ndarray
    modes: Tuple[str, ...] = MODE_ORDER

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes or any(m not in MODE_ORDER for m in modes) or len(set(modes)) != len(modes):
            raise UnknownMode(f"modes must be an ordered subset of {MODE_ORDER}, got {modes}")
        if list(modes) != sorted(modes, key=MODE_ORDER.index):
            raise UnknownMode(f"modes must follow the order {MODE_ORDER}, got {modes}")
        matrix = np.array(self.matrix, dtype=float)
        dim = 2 * len(modes)
        if matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for modes {modes}, got {matrix.shape}")
        norm = np.linalg.norm(matrix)
        if np.linalg.norm(matrix - matrix.T) > SYMMETRY_RTOL * norm + 1e-300:
            raise ValueError("covariance matrix is not symmetric")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "modes", modes)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def block(self, row_mode: str, col_mode: str) -> np.ndarray:
        """2x2 block (L_j on the diagonal, C_jk off it)."""
        i, j = self.index(row_mode), self.index(col_mode)
        return self.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def index(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise UnknownMode(f"mode {mode!r} not in {self.modes}") from None


@dataclass(frozen=True)
class OperatingPoint:
    """Everything computed at one working point."""

    params: SystemParams
    derived: DerivedQuantities
    drift: DriftMatrix
    noise: NoiseMatrix
    stability: StabilityReport
    covariance: Optional[CovarianceMatrix]
    residual: Optional[float]


def _kernel_array(K: Union[DriftMatrix, np.ndarray]) -> np.ndarray:
    return np.asarray(K.entries if isinstance(K, DriftMatrix) else K, dtype=float)


def _noise_array(N: Union[NoiseMatrix, np.ndarray]) -> np.ndarray:
    return np.asarray(N.entries if isinstance(N, NoiseMatrix) else N, dtype=float)


def lyapunov_residual(K, N, V) -> float:
    """||K V + V K^T + N||_F / ||N||_F."""
    K = _kernel_array(K)
    N = _noise_array(N)
    V = V.matrix if isinstance(V, CovarianceMatrix) else np.asarray(V)
    return float(np.linalg.norm(K @ V + V @ K.T + N) / np.linalg.norm(N))


def modes_for_dim(dim: int) -> Tuple[str, ...]:
    return MODE_ORDER[: dim // 2]


def solve_lyapunov(
    K: Union[DriftMatrix, np.ndarray],
    N: Union[NoiseMatrix, np.ndarray],
    modes: Optional[Sequence[str]] = None,
    check_stability: bool = True,
) -> CovarianceMatrix:
    """
    Stationary covariance V of a stable kernel.

    Row-major vectorization turns the equation into (K (x) I + I (x) K) vec V
    = -vec N. One step of iterative refinement follows the LU solve.
    """
    A = _kernel_array(K)
    D = _noise_array(N)
    n = A.shape[0]

    if check_stability:
        report = stability(K)
        if not report.stable:
            raise UnstableSystem(f"kernel is not stable (margin {report.margin:.3e} rad/s)")

    scale = float(np.max(np.abs(A))) or 1.0
    As = A / scale
    Ds = D / scale

    identity = np.eye(n)
    L = np.kron(As, identity) + np.kron(identity, As)
    rhs = -Ds.reshape(-1)

    condition = np.linalg.cond(L)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularSystem("vectorized Lyapunov system is numerically singular")
    try:
        lu = linalg.lu_factor(L, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularSystem(f"vectorized Lyapunov system could not be factored: {e}") from e

    vec = linalg.lu_solve(lu, rhs)
    vec = vec + linalg.lu_solve(lu, rhs - L @ vec)

    V = vec.reshape(n, n)
    V = 0.5 * (V + V.T)

    residual = lyapunov_residual(A, D, V)
    if residual > RESIDUAL_WARN:
        logger.warning(f"Lyapunov residual {residual:.2e} above {RESIDUAL_WARN:g}")
    else:
        logger.debug(f"Lyapunov residual {residual:.2e}")

    return CovarianceMatrix(V, tuple(modes) if modes is not None else modes_for_dim(n))


def covariance_integral(
    K: Union[DriftMatrix, np.ndarray],
    N: Union[NoiseMatrix, np.ndarray],
    horizon: Optional[float] = None,
) -> np.ndarray:
    """
    Quadrature of int_0^T exp(K t) N exp(K^T t) dt.

    T defaults to 40 / margin, where the integrand has decayed by e^-80.
    """
    A = _kernel_array(K)
    D = _noise_array(N)
    if horizon is None:
        margin = -float(np.max(np.linalg.eigvals(A).real))
        if margin <= 0:
            raise UnstableSystem("covariance integral diverges for an unstable kernel")
        horizon = 40.0 / margin

    def integrand(t: float) -> np.ndarray:
        E = linalg.expm(A * t)
        return E @ D @ E.T

    value, _ = integrate.quad_vec(integrand, 0.0, horizon, epsrel=1e-10, epsabs=0.0)
    return 0.5 * (value + value.T)


def steady_state_at(params: SystemParams) -> OperatingPoint:
    """Derive, build K and N, check stability and solve for V when stable."""
    derived = derive(params)
    K = build_drift(derived, params)
    N = build_noise(derived, params)
    report = stability(K)
    covariance = None
    residual = None
    if report.stable:
        covariance = solve_lyapunov(K, N, check_stability=False)
        residual = lyapunov_residual(K, N, covariance)
    return OperatingPoint(
        params=params,
        derived=derived,
        drift=K,
        noise=N,
        stability=report,
        covariance=covariance,
        residual=residual,
    )


def cm_to_csv(V: CovarianceMatrix, path: Union[str, Path]) -> None:
    """Row-major matrix, 12 significant digits, no header."""
    pd.DataFrame(V.matrix).to_csv(path, header=False, index=False, float_format="%.12g", lineterminator="\n")


def cm_from_csv(path: Union[str, Path], modes: Optional[Sequence[str]] = None) -> CovarianceMatrix:
    matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
    return CovarianceMatrix(matrix, tuple(modes) if modes is not None else modes_for_dim(matrix.shape[0]))
