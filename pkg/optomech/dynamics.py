"""
Linearized fluctuation dynamics: drift kernel, noise matrix and stability.

Quadrature order everywhere is (x_a, y_a, x_b, y_b, q, p).

Stability is decided by the eigenvalues of the kernel. The Routh-Hurwitz
table of its characteristic polynomial is reported alongside; C1 is the
constant coefficient (det K, static instability) and C2 the fifth Hurwitz
minor (oscillatory instability). That labeling is ours.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateInput, EigenFailure
from .logger import get_logger
from .model import DerivedQuantities, PerCavity, SystemParams

logger = get_logger("dynamics")

DIM = 6

# Structurally nonzero slots of the kernel
DRIFT_PATTERN = np.array(
    [
        [1, 1, 0, 0, 0, 0],
        [1, 1, 0, 0, 1, 0],
        [0, 0, 1, 1, 0, 0],
        [0, 0, 1, 1, 1, 0],
        [0, 0, 0, 0, 0, 1],
        [1, 0, 1, 0, 1, 1],
    ],
    dtype=bool,
)

STABILITY_TOLERANCE = 1e-9  # times omega_m
VERDICT_CHECK_MARGIN = 1e-6  # times the kernel scale


@dataclass(frozen=True)
class DriftMatrix:
    entries: np.ndarray
    omega_m: float

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class NoiseMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class HurwitzTable:
    minors: np.ndarray
    stable: bool


@dataclass(frozen=True)
class StabilityReport:
    char_poly: np.ndarray  # descending powers, of K / poly_scale
    hurwitz_minors: np.ndarray
    eigen_margins: np.ndarray  # real parts, descending
    stable: bool
    margin: float  # rad/s
    hurwitz_stable: bool
    poly_scale: float

    @property
    def c1(self) -> float:
        return float(self.char_poly[-1])

    @property
    def c2(self) -> float:
        return float(self.hurwitz_minors[-2])


MatrixLike = Union[DriftMatrix, np.ndarray]


def _as_array(K: MatrixLike) -> np.ndarray:
    return K.entries if isinstance(K, DriftMatrix) else np.asarray(K)


def drift_from_rates(
    kappa: Sequence[float],
    delta: Sequence[float],
    g_eff: Sequence[float],
    omega_m: float,
    gamma_m: float,
) -> DriftMatrix:
    """Kernel from raw rates, each per-cavity argument ordered (A, B)."""
    kappa_a, kappa_b = kappa
    delta_a, delta_b = delta
    g_a, g_b = g_eff
    K = np.array(
        [
            [-kappa_a, delta_a, 0.0, 0.0, 0.0, 0.0],
            [-delta_a, -kappa_a, 0.0, 0.0, g_a, 0.0],
            [0.0, 0.0, -kappa_b, delta_b, 0.0, 0.0],
            [0.0, 0.0, -delta_b, -kappa_b, -g_b, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, omega_m],
            [g_a, 0.0, -g_b, 0.0, -omega_m, -gamma_m],
        ]
    )
    return DriftMatrix(entries=K, omega_m=float(omega_m))


def noise_from_rates(kappa: Sequence[float], gamma_m: float, nbar: float) -> NoiseMatrix:
    kappa_a, kappa_b = kappa
    return NoiseMatrix(np.diag([kappa_a, kappa_a, kappa_b, kappa_b, 0.0, gamma_m * (2.0 * nbar + 1.0)]))


def build_drift(d: DerivedQuantities, params: SystemParams) -> DriftMatrix:
    return drift_from_rates(
        kappa=PerCavity(params.cavity_a.kappa, params.cavity_b.kappa),
        delta=PerCavity(params.cavity_a.detuning_effective, params.cavity_b.detuning_effective),
        g_eff=d.g_eff,
        omega_m=params.mirror.omega_m,
        gamma_m=params.mirror.gamma_m,
    )


def build_noise(d: DerivedQuantities, params: SystemParams) -> NoiseMatrix:
    return noise_from_rates(
        kappa=PerCavity(params.cavity_a.kappa, params.cavity_b.kappa),
        gamma_m=params.mirror.gamma_m,
        nbar=d.nbar,
    )


def optical_damping(g_eff: float, kappa: float, delta: float, omega_m: float) -> float:
    """
    Weak-coupling damping rate one cavity adds to the mirror (rad/s).

    Im of the radiation-pressure response G^2 Delta / ((kappa - i w)^2 + Delta^2)
    at w = omega_m. Positive (cooling) for Delta > 0.
    """
    lower = kappa**2 + (delta - omega_m) ** 2
    upper = kappa**2 + (delta + omega_m) ** 2
    return 2.0 * kappa * omega_m * g_eff**2 * delta / (lower * upper)


def _is_exact(A: np.ndarray) -> bool:
    return A.dtype == object or np.issubdtype(A.dtype, np.integer)


def characteristic_polynomial(K: MatrixLike) -> np.ndarray:
    """
    Monic coefficients of det(lambda I - K), highest power first.

    Faddeev-LeVerrier recursion. Integer (or Fraction object) input is
    carried through in exact rational arithmetic and returns Fractions.
    """
    A = _as_array(K)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DegenerateInput(f"square matrix required, got shape {A.shape}")

    if _is_exact(A):
        A = np.vectorize(Fraction, otypes=[object])(A)
        identity = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            identity[i, i] = Fraction(1)
        coeffs = [Fraction(1)]
    else:
        A = A.astype(float)
        identity = np.eye(n)
        coeffs = [1.0]

    M = identity * 0
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * identity
        coeffs.append(-np.trace(A @ M) / k)

    if _is_exact(A):
        return np.array(coeffs, dtype=object)
    return np.array(coeffs, dtype=float)


def hurwitz_matrix(coeffs: Sequence[float]) -> np.ndarray:
    """H[i, j] = a_{2j - i} (1-based), a_k = 0 outside 0..n."""
    a = np.asarray([float(c) for c in coeffs])
    n = len(a) - 1
    H = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            k = 2 * j - i
            if 0 <= k <= n:
                H[i - 1, j - 1] = a[k]
    return H


def routh_hurwitz(coeffs: Sequence[float]) -> HurwitzTable:
    """Leading principal minors of the Hurwitz matrix of a monic polynomial."""
    a = np.asarray([float(c) for c in coeffs])
    if np.any(np.isnan(a)):
        raise DegenerateInput("characteristic polynomial has NaN coefficients")
    H = hurwitz_matrix(a)
    n = H.shape[0]
    minors = np.array([np.linalg.det(H[:k, :k]) for k in range(1, n + 1)])
    stable = bool(np.all(a > 0) and np.all(minors > 0))
    return HurwitzTable(minors=minors, stable=stable)


def stability(K: MatrixLike, N: Optional[NoiseMatrix] = None) -> StabilityReport:
    """
    Eigenvalue verdict plus Routh-Hurwitz table.

    Stable iff max Re(lambda) < -1e-9 * omega_m; marginal kernels count as
    unstable. For plain arrays the reference rate is the largest entry.
    """
    A = np.asarray(_as_array(K), dtype=float)
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    if scale == 0.0:
        scale = 1.0
    reference = K.omega_m if isinstance(K, DriftMatrix) else scale

    try:
        eigenvalues = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as e:
        raise EigenFailure(f"eigensolver did not converge: {e}") from e
    if not np.all(np.isfinite(eigenvalues)):
        raise EigenFailure("eigensolver returned non-finite values")

    real_parts = np.sort(eigenvalues.real)[::-1]
    margin = float(-real_parts[0])
    stable = bool(real_parts[0] < -STABILITY_TOLERANCE * reference)

    coeffs = characteristic_polynomial(A / scale)
    table = routh_hurwitz(coeffs)

    if table.stable != stable and abs(margin) > VERDICT_CHECK_MARGIN * scale:
        logger.warning(
            f"Routh-Hurwitz verdict ({table.stable}) disagrees with eigenvalues ({stable}), margin={margin:.3e}"
        )

    return StabilityReport(
        char_poly=coeffs,
        hurwitz_minors=table.minors,
        eigen_margins=real_parts,
        stable=stable,
        margin=margin,
        hurwitz_stable=table.stable,
        poly_scale=scale,
    )
