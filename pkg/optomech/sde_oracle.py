"""
Stochastic cross-check of the stationary covariance.

Integrates the linear Langevin equations df = K f dt + L dW (L L^T = N) with
Euler-Maruyama over an ensemble of trajectories and compares the time- and
ensemble-averaged second moments with the Lyapunov solution. The dynamics is
linear, so the classical process with the symmetrized noise strength has the
same stationary covariance as the quantum one.

Run it on scaled "desk" rates (omega_m ~ 1): at laboratory numbers the mirror
relaxes over ~1e6 cavity lifetimes.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .dynamics import DriftMatrix, NoiseMatrix, drift_from_rates, noise_from_rates, stability
from .errors import ParameterError, UnstableScheme, UnstableSystem
from .logger import get_logger, log_execution_time
from .steady_state import CovarianceMatrix, modes_for_dim, solve_lyapunov

logger = get_logger("oracle")

DT_GUARD = 0.1  # dt * spectral radius
BURN_IN_RELAXATIONS = 10.0  # burn_in >= this / margin
ORACLE_RTOL = 0.05
ORACLE_STDERR_FACTOR = 4.0


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_total: float  # includes the burn-in
    burn_in: Optional[float] = None  # None: 10 / margin
    n_trajectories: int = 2000
    seed: int = 0
    n_batches: int = 20
    sample_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be > 0")
        if self.n_trajectories < 1:
            raise ParameterError("n_trajectories must be positive")
        if self.n_batches < 2 or self.n_trajectories % self.n_batches:
            raise ParameterError("n_batches must be >= 2 and divide n_trajectories")
        if self.sample_every < 1:
            raise ParameterError("sample_every must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class EnsembleEstimate:
    matrix: np.ndarray
    stderr: np.ndarray  # batch-means standard error, entrywise
    n_samples: int  # time samples per trajectory

    @property
    def cm(self) -> CovarianceMatrix:
        return CovarianceMatrix(self.matrix, modes_for_dim(self.matrix.shape[0]))


@dataclass(frozen=True)
class ConvergenceReport:
    dts: Tuple[float, ...]
    biases: Tuple[float, ...]  # relative Frobenius distance to the exact V
    order: float


@dataclass(frozen=True)
class OracleComparison:
    lyapunov: CovarianceMatrix
    ensemble: EnsembleEstimate
    distance: float  # relative Frobenius
    tolerance: float
    passed: bool


def _arrays(K, N) -> Tuple[np.ndarray, np.ndarray]:
    A = np.asarray(K.entries if isinstance(K, DriftMatrix) else K, dtype=float)
    D = np.asarray(N.entries if isinstance(N, NoiseMatrix) else N, dtype=float)
    return A, D


def noise_factor(N: np.ndarray) -> np.ndarray:
    """L with L L^T = N; zero-noise rows stay exactly zero."""
    if np.count_nonzero(N - np.diag(np.diag(N))) == 0:
        return np.diag(np.sqrt(np.clip(np.diag(N), 0.0, None)))
    w, U = linalg.eigh(N)
    return U @ np.diag(np.sqrt(np.clip(w, 0.0, None)))


def check_time_step(A: np.ndarray, dt: float) -> float:
    radius = float(np.max(np.abs(np.linalg.eigvals(A))))
    if dt * radius >= DT_GUARD:
        raise UnstableScheme(f"dt * spectral radius = {dt * radius:.3g} >= {DT_GUARD}")
    return radius


def _stable_margin(K) -> float:
    report = stability(K)
    if not report.stable:
        raise UnstableSystem(f"kernel is not stable (margin {report.margin:.3e})")
    return report.margin


@log_execution_time()
def integrate_ensemble(
    K: Union[DriftMatrix, np.ndarray],
    N: Union[NoiseMatrix, np.ndarray],
    config: IntegratorConfig,
) -> EnsembleEstimate:
    """Euler-Maruyama ensemble; moments averaged over time after burn-in and over trajectories."""
    A, D = _arrays(K, N)
    margin = _stable_margin(A)
    check_time_step(A, config.dt)

    burn_in = config.burn_in if config.burn_in is not None else BURN_IN_RELAXATIONS / margin
    if burn_in < BURN_IN_RELAXATIONS / margin * (1 - 1e-12):
        raise ParameterError(f"burn_in {burn_in:g} shorter than {BURN_IN_RELAXATIONS:g}/margin")
    n_burn = int(np.ceil(burn_in / config.dt))
    n_steps = int(np.ceil(config.t_total / config.dt))
    if n_steps <= n_burn:
        raise ParameterError("t_total must exceed the burn-in")

    dim = A.shape[0]
    per_batch = config.n_trajectories // config.n_batches
    L = noise_factor(D)
    drift_step = np.eye(dim) + config.dt * A
    noise_step = np.sqrt(config.dt) * L

    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    f = np.zeros((config.n_trajectories, dim))
    acc = np.zeros((config.n_batches, dim, dim))
    n_samples = 0

    for step in range(1, n_steps + 1):
        w = rng.standard_normal((config.n_trajectories, dim))
        f = f @ drift_step.T + w @ noise_step.T
        if step > n_burn and (step - n_burn) % config.sample_every == 0:
            fb = f.reshape(config.n_batches, per_batch, dim)
            acc += np.einsum("bti,btj->bij", fb, fb)
            n_samples += 1

    batch_means = acc / (per_batch * n_samples)
    mean = batch_means.mean(axis=0)
    mean = 0.5 * (mean + mean.T)
    stderr = batch_means.std(axis=0, ddof=1) / np.sqrt(config.n_batches)
    logger.info(
        f"ensemble of {config.n_trajectories} trajectories, {n_samples} samples each after {n_burn} burn-in steps",
        extra={"seed": config.seed},
    )
    return EnsembleEstimate(matrix=mean, stderr=stderr, n_samples=n_samples)


def em_stationary_covariance(
    K: Union[DriftMatrix, np.ndarray],
    N: Union[NoiseMatrix, np.ndarray],
    dt: float,
) -> np.ndarray:
    """Exact stationary covariance of the Euler-Maruyama recursion: X = M X M^T + N dt, M = I + K dt."""
    A, D = _arrays(K, N)
    check_time_step(A, dt)
    M = np.eye(A.shape[0]) + dt * A
    X = linalg.solve_discrete_lyapunov(M, D * dt)
    return 0.5 * (X + X.T)


def weak_convergence_check(
    K: Union[DriftMatrix, np.ndarray],
    N: Union[NoiseMatrix, np.ndarray],
    dt_ladder: Sequence[float],
) -> ConvergenceReport:
    """Log-log slope of the stationary-covariance bias over a dt ladder (expected ~1)."""
    A, D = _arrays(K, N)
    _stable_margin(A)
    exact = solve_lyapunov(A, D, modes=None, check_stability=False) if A.shape[0] % 2 == 0 else None
    V = exact.matrix if exact is not None else linalg.solve_continuous_lyapunov(A, -D)

    dts = tuple(float(dt) for dt in dt_ladder)
    biases = []
    for dt in dts:
        X = em_stationary_covariance(A, D, dt)
        biases.append(float(np.linalg.norm(X - V) / np.linalg.norm(V)))
    order = float(np.polyfit(np.log(dts), np.log(biases), 1)[0])
    return ConvergenceReport(dts=dts, biases=tuple(biases), order=order)


def desk_kernel(
    omega_m: float,
    gamma_m: float,
    nbar: float,
    kappa: Sequence[float],
    delta: Sequence[float],
    g_eff: Sequence[float],
) -> Tuple[DriftMatrix, NoiseMatrix]:
    """Kernel and noise straight from scaled rates."""
    K = drift_from_rates(kappa=kappa, delta=delta, g_eff=g_eff, omega_m=omega_m, gamma_m=gamma_m)
    N = noise_from_rates(kappa=kappa, gamma_m=gamma_m, nbar=nbar)
    return K, N


def compare_to_lyapunov(
    K: Union[DriftMatrix, np.ndarray],
    N: Union[NoiseMatrix, np.ndarray],
    config: IntegratorConfig,
) -> OracleComparison:
    """Pass when the distance is within max(5%, 4 x relative stderr)."""
    V = solve_lyapunov(K, N)
    ensemble = integrate_ensemble(K, N, config)
    norm = np.linalg.norm(V.matrix)
    distance = float(np.linalg.norm(ensemble.matrix - V.matrix) / norm)
    tolerance = max(ORACLE_RTOL, ORACLE_STDERR_FACTOR * float(np.linalg.norm(ensemble.stderr) / norm))
    passed = distance <= tolerance
    log = logger.info if passed else logger.warning
    log(f"oracle distance {distance:.4f} (tolerance {tolerance:.4f}): {'pass' if passed else 'FAIL'}")
    return OracleComparison(lyapunov=V, ensemble=ensemble, distance=distance, tolerance=tolerance, passed=passed)
