"""
Gaussian-state entanglement tools.

Quadrature convention: j = (x_j + i y_j) / sqrt(2), vacuum variance 1/2,
uncertainty bound nu >= 1/2 on every symplectic eigenvalue. A two-mode
reduction is entangled iff its smallest partially transposed symplectic
eigenvalue is below 1/2. Logarithmic negativity uses the natural log.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

import numpy as np

from .errors import EigenFailure, NegativeDiscriminant, UnknownMode
from .steady_state import MODE_ORDER, CovarianceMatrix

PHYSICALITY_TOL = 1e-9
DISCRIMINANT_TOL = 1e-9

PAIRS = (("a", "m"), ("b", "m"), ("a", "b"))


@dataclass(frozen=True)
class PairResult:
    nu_minus: float
    log_neg: float


@dataclass(frozen=True)
class EntanglementReport:
    pair_results: Dict[Tuple[str, str], PairResult]
    tripartite_npt: Dict[str, bool]  # keyed by the transposed mode
    fully_inseparable: bool

    @property
    def field_witness(self) -> bool:
        """Field-field entanglement co-occurring with some field-mirror entanglement."""
        e = self.pair_results
        return e[("a", "b")].log_neg > 0 and (e[("a", "m")].log_neg > 0 or e[("b", "m")].log_neg > 0)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal form with 2x2 blocks [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def reduced_cm(V: CovarianceMatrix, modes: Iterable[str]) -> CovarianceMatrix:
    """Submatrix built from the blocks of the selected modes."""
    wanted = tuple(modes)
    for mode in wanted:
        if mode not in V.modes:
            raise UnknownMode(f"mode {mode!r} not in {V.modes}")
    ordered = tuple(m for m in MODE_ORDER if m in wanted)
    idx = [k for m in ordered for k in (2 * V.index(m), 2 * V.index(m) + 1)]
    return CovarianceMatrix(V.matrix[np.ix_(idx, idx)], ordered)


def partial_transpose(V: CovarianceMatrix, transposed_mode: str) -> CovarianceMatrix:
    """Flip the sign of the momentum quadrature of one mode (P V P)."""
    k = V.index(transposed_mode)
    signs = np.ones(2 * V.n_modes)
    signs[2 * k + 1] = -1.0
    return CovarianceMatrix(V.matrix * np.outer(signs, signs), V.modes)


def symplectic_eigenvalues(V: CovarianceMatrix) -> np.ndarray:
    """Moduli of the eigenvalues of Sigma V, one per conjugate pair, ascending."""
    omega = symplectic_form(V.n_modes)
    try:
        eigenvalues = np.linalg.eigvals(omega @ V.matrix)
    except np.linalg.LinAlgError as e:
        raise EigenFailure(f"symplectic eigensolve failed: {e}") from e
    if not np.all(np.isfinite(eigenvalues)):
        raise EigenFailure("symplectic eigensolve returned non-finite values")
    moduli = np.sort(np.abs(eigenvalues))
    return moduli[::2]


def check_physicality(V: CovarianceMatrix) -> Tuple[bool, float]:
    """(physical, smallest symplectic eigenvalue) under the nu >= 1/2 bound."""
    nu_min = float(symplectic_eigenvalues(V)[0])
    return nu_min >= 0.5 - PHYSICALITY_TOL, nu_min


def symplectic_spectrum_2mode_closed_form(V: CovarianceMatrix, pt: bool = True) -> Tuple[float, float]:
    """
    (n_minus, n_plus) of a two-mode CM from its local invariants.

    chi = det L_j + det L_k -/+ 2 det C_jk (minus when partially transposed),
    n_pm^2 = [chi +/- sqrt(chi^2 - 4 det V)] / 2.
    """
    if V.n_modes != 2:
        raise UnknownMode(f"closed form needs a two-mode matrix, got modes {V.modes}")
    M = V.matrix
    det_a = np.linalg.det(M[:2, :2])
    det_b = np.linalg.det(M[2:, 2:])
    det_c = np.linalg.det(M[:2, 2:])
    chi = det_a + det_b + (-2.0 if pt else 2.0) * det_c
    det_v = np.linalg.det(M)
    disc = chi**2 - 4.0 * det_v
    if disc < -DISCRIMINANT_TOL * max(chi**2, 1.0):
        raise NegativeDiscriminant(f"chi^2 - 4 det V = {disc:.3e} < 0; matrix is not physical")
    root = math.sqrt(max(disc, 0.0))
    n_plus_sq = max(0.5 * (chi + root), 0.0)
    # n_minus^2 * n_plus^2 = det V avoids cancellation when n_minus << n_plus
    n_minus_sq = max(det_v / n_plus_sq, 0.0) if n_plus_sq > 0 else 0.0
    return math.sqrt(n_minus_sq), math.sqrt(n_plus_sq)


def log_negativity_from_nu(nu_minus: float) -> float:
    """Zero within the physicality tolerance of the separability bound."""
    if nu_minus <= 0.0:
        return math.inf
    if 2.0 * nu_minus >= 1.0 - PHYSICALITY_TOL:
        return 0.0
    return -math.log(2.0 * nu_minus)


def log_negativity(V: CovarianceMatrix) -> float:
    """max(0, -ln 2 n_minus) of the partially transposed two-mode CM."""
    nu_minus, _ = symplectic_spectrum_2mode_closed_form(V, pt=True)
    return log_negativity_from_nu(nu_minus)


def pair_result(V: CovarianceMatrix, pair: Tuple[str, str]) -> PairResult:
    nu_minus, _ = symplectic_spectrum_2mode_closed_form(reduced_cm(V, pair), pt=True)
    return PairResult(nu_minus=nu_minus, log_neg=log_negativity_from_nu(nu_minus))


def tripartite_npt(V: CovarianceMatrix) -> Tuple[Dict[str, bool], bool]:
    """NPT flag for each 1|2 cut (keyed by the single mode) and their conjunction."""
    if V.n_modes != 3:
        raise UnknownMode(f"tripartite test needs modes {MODE_ORDER}, got {V.modes}")
    flags = {}
    for mode in MODE_ORDER:
        nu_min = float(symplectic_eigenvalues(partial_transpose(V, mode))[0])
        flags[mode] = nu_min < 0.5 - PHYSICALITY_TOL
    return flags, all(flags.values())


def entanglement_report(V: CovarianceMatrix) -> EntanglementReport:
    pairs = {pair: pair_result(V, pair) for pair in PAIRS}
    flags, fully = tripartite_npt(V)
    return EntanglementReport(pair_results=pairs, tripartite_npt=flags, fully_inseparable=fully)
