"""
Physical model of two driven cavities sharing one movable mirror.

Holds the parameter types and computes the operating-point quantities the
linearized dynamics are built from: single-photon couplings, drive amplitudes,
intracavity amplitudes, effective couplings, thermal occupation and the static
mirror displacement.

CONVENTIONS:
- All frequencies and rates are angular (rad/s).
- Stationary intracavity amplitudes are taken real and non-negative; the
  drive phase is absorbed into the field quadrature reference.
- Cavity A pushes the mirror with sign +1, cavity B (on the other face) with -1.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import constants as sc

from .errors import NoConvergence, ParameterError
from .logger import get_logger

logger = get_logger("model")

# Mirror damping above this fraction of omega_m leaves the Markov regime
MARKOV_RATIO_LIMIT = 1e-2

FIXED_POINT_DEDUP_RTOL = 1e-9


class CavityLabel(str, Enum):
    A = "A"
    B = "B"


class PerCavity(NamedTuple):
    """A value for each cavity, in (A, B) order."""

    a: float
    b: float


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = sc.hbar
    k_B: float = sc.k

    def __post_init__(self):
        if not (self.hbar > 0 and self.k_B > 0):
            raise ParameterError("hbar and k_B must be strictly positive")


@dataclass(frozen=True)
class CavityParams:
    """One Fabry-Perot cavity and its drive laser."""

    label: CavityLabel
    omega_laser: float  # rad/s
    length: float  # m
    kappa: float  # rad/s
    power: float  # W
    detuning_effective: float = 0.0  # rad/s
    omega_cavity: Optional[float] = None  # rad/s, defaults to omega_laser

    def __post_init__(self):
        object.__setattr__(self, "label", CavityLabel(self.label))
        if self.omega_cavity is None:
            object.__setattr__(self, "omega_cavity", self.omega_laser)
        name = f"cavity_{self.label.value.lower()}"
        if not self.kappa > 0:
            raise ParameterError(f"{name}.kappa must be > 0 (got {self.kappa})")
        if not self.power >= 0:
            raise ParameterError(f"{name}.power must be >= 0 (got {self.power})")
        if not self.length > 0:
            raise ParameterError(f"{name}.length must be > 0 (got {self.length})")
        if not self.omega_laser > 0:
            raise ParameterError(f"{name}.omega_laser must be > 0 (got {self.omega_laser})")
        if not self.omega_cavity > 0:
            raise ParameterError(f"{name}.omega_cavity must be > 0 (got {self.omega_cavity})")
        if not math.isfinite(self.detuning_effective):
            raise ParameterError(f"{name}.detuning_effective must be finite")

    @property
    def side_sign(self) -> int:
        return 1 if self.label is CavityLabel.A else -1


@dataclass(frozen=True)
class MirrorParams:
    """Single mechanical mode of the shared mirror."""

    omega_m: float  # rad/s
    gamma_m: float  # rad/s
    mass: float  # kg
    temperature: float  # K

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ParameterError(f"mirror.omega_m must be > 0 (got {self.omega_m})")
        if not self.gamma_m > 0:
            raise ParameterError(f"mirror.gamma_m must be > 0 (got {self.gamma_m})")
        if not self.mass > 0:
            raise ParameterError(f"mirror.mass must be > 0 (got {self.mass})")
        if not self.temperature >= 0:
            raise ParameterError(f"mirror.temperature must be >= 0 (got {self.temperature})")
        if not self.markov_regime:
            logger.warning(
                f"gamma_m/omega_m = {self.gamma_m / self.omega_m:.3g} exceeds "
                f"{MARKOV_RATIO_LIMIT:g}; the Markovian Brownian-noise model is questionable"
            )

    @property
    def markov_regime(self) -> bool:
        return self.gamma_m / self.omega_m <= MARKOV_RATIO_LIMIT


@dataclass(frozen=True)
class SystemParams:
    cavity_a: CavityParams
    cavity_b: CavityParams
    mirror: MirrorParams
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if self.cavity_a.label is not CavityLabel.A:
            raise ParameterError("cavity_a must carry label A")
        if self.cavity_b.label is not CavityLabel.B:
            raise ParameterError("cavity_b must carry label B")

    @property
    def cavities(self) -> Tuple[CavityParams, CavityParams]:
        return (self.cavity_a, self.cavity_b)


@dataclass(frozen=True)
class DerivedQuantities:
    g0: PerCavity  # rad/s
    drive_amp: PerCavity  # 1/s
    alpha_s: PerCavity
    g_eff: PerCavity  # rad/s
    nbar: float
    q_s: float


@dataclass(frozen=True)
class FixedPoint:
    """One self-consistent static solution for given nominal detunings."""

    delta_a: float
    delta_b: float
    alpha_a: float
    alpha_b: float
    q_s: float
    stable: bool
    margin: float


def single_photon_coupling(cavity: CavityParams, mirror: MirrorParams, constants: PhysicalConstants) -> float:
    """G0 = (omega_j / l_j) * sqrt(hbar / (mu * omega_m))."""
    return cavity.omega_cavity / cavity.length * math.sqrt(constants.hbar / (mirror.mass * mirror.omega_m))


def drive_amplitude(cavity: CavityParams, constants: PhysicalConstants) -> float:
    """|E_j| = sqrt(2 kappa_j P_j / (hbar omega_lj))."""
    return math.sqrt(2.0 * cavity.kappa * cavity.power / (constants.hbar * cavity.omega_laser))


def intracavity_amplitude(drive_amp: float, kappa: float, detuning: float) -> float:
    return drive_amp / math.hypot(kappa, detuning)


def thermal_occupation(omega_m: float, temperature: float, constants: PhysicalConstants) -> float:
    """Bose occupation of the mirror mode; exactly zero at T = 0."""
    if temperature == 0:
        return 0.0
    x = constants.hbar * omega_m / (constants.k_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def derive(params: SystemParams) -> DerivedQuantities:
    """Operating-point quantities at the effective detunings stored in params."""
    mirror = params.mirror
    g0 = []
    drive = []
    alpha = []
    for cavity in params.cavities:
        g0.append(single_photon_coupling(cavity, mirror, params.constants))
        drive.append(drive_amplitude(cavity, params.constants))
        alpha.append(intracavity_amplitude(drive[-1], cavity.kappa, cavity.detuning_effective))

    g_eff = [math.sqrt(2.0) * a * g for a, g in zip(alpha, g0)]
    q_s = sum(c.side_sign * g * a**2 for c, g, a in zip(params.cavities, g0, alpha)) / mirror.omega_m

    return DerivedQuantities(
        g0=PerCavity(*g0),
        drive_amp=PerCavity(*drive),
        alpha_s=PerCavity(*alpha),
        g_eff=PerCavity(*g_eff),
        nbar=thermal_occupation(mirror.omega_m, mirror.temperature, params.constants),
        q_s=q_s,
    )


def with_overrides(
    params: SystemParams,
    delta_a: Optional[float] = None,
    delta_b: Optional[float] = None,
    p_a: Optional[float] = None,
    p_b: Optional[float] = None,
) -> SystemParams:
    """Copy of params with effective detunings (rad/s) and/or powers (W) replaced."""
    cavity_a = params.cavity_a
    cavity_b = params.cavity_b
    if delta_a is not None:
        cavity_a = replace(cavity_a, detuning_effective=float(delta_a))
    if p_a is not None:
        cavity_a = replace(cavity_a, power=float(p_a))
    if delta_b is not None:
        cavity_b = replace(cavity_b, detuning_effective=float(delta_b))
    if p_b is not None:
        cavity_b = replace(cavity_b, power=float(p_b))
    return replace(params, cavity_a=cavity_a, cavity_b=cavity_b)


# ============================================
# NOMINAL-DETUNING FIXED POINTS
# ============================================


class _FixedPointProblem:
    """Scalar residual F(q) = q - sum_j s_j G0_j alpha_j(q)^2 / omega_m."""

    def __init__(self, params: SystemParams, nominal: Tuple[float, float]):
        self.omega_m = params.mirror.omega_m
        self.signs = np.array([c.side_sign for c in params.cavities], dtype=float)
        self.kappa = np.array([c.kappa for c in params.cavities], dtype=float)
        self.g0 = np.array([single_photon_coupling(c, params.mirror, params.constants) for c in params.cavities])
        self.drive_sq = np.array([drive_amplitude(c, params.constants) ** 2 for c in params.cavities])
        self.nominal = np.asarray(nominal, dtype=float)

    def detunings(self, q: float) -> np.ndarray:
        return self.nominal - self.signs * self.g0 * q

    def displacement(self, q: float) -> float:
        delta = self.detunings(q)
        return float(np.sum(self.signs * self.g0 * self.drive_sq / (self.kappa**2 + delta**2)) / self.omega_m)

    def residual(self, q: float) -> float:
        return q - self.displacement(q)

    def derivative(self, q: float) -> float:
        delta = self.detunings(q)
        denom = (self.kappa**2 + delta**2) ** 2
        return 1.0 - float(np.sum(2.0 * self.g0**2 * self.drive_sq * delta / denom) / self.omega_m)

    def relative_residual(self, q: float) -> float:
        g = self.displacement(q)
        scale = max(abs(q), abs(g), 1e-300)
        return abs(q - g) / scale

    @property
    def q_bound(self) -> float:
        return float(np.sum(self.g0 * self.drive_sq / self.kappa**2) / self.omega_m)


def _bracketed_newton(problem: _FixedPointProblem, lo: float, hi: float, max_iter: int) -> Optional[float]:
    """Damped Newton confined to a sign-change bracket; bisects when a step leaves it."""
    f_lo = problem.residual(lo)
    q = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f = problem.residual(q)
        if f == 0.0 or problem.relative_residual(q) < 1e-13:
            return q
        if (f < 0) == (f_lo < 0):
            lo, f_lo = q, f
        else:
            hi = q
        slope = problem.derivative(q)
        step = -f / slope if slope != 0 else math.inf
        candidate = q + step
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        if abs(candidate - q) <= 1e-15 * max(abs(q), 1.0):
            return candidate
        q = candidate
    return q if problem.relative_residual(q) < 1e-10 else None


def solve_operating_point(
    params: SystemParams,
    nominal_detunings: Tuple[float, float],
    grid_points: int = 4001,
    max_iter: int = 200,
) -> List[FixedPoint]:
    """
    All real self-consistent static solutions for nominal detunings (rad/s).

    The residual is scanned on a q grid spanning every admissible displacement;
    each sign change seeds a bracketed damped Newton iteration. Roots closer
    than 1e-9 (relative) are merged. Every solution is tagged with the
    stability verdict of its linearized kernel.
    """
    from .dynamics import build_drift, stability

    problem = _FixedPointProblem(params, nominal_detunings)
    bound = problem.q_bound

    if bound == 0.0:
        roots = [0.0]
    else:
        span = bound * (1.0 + 1e-6)
        grid = np.linspace(-span, span, grid_points)
        values = np.array([problem.residual(q) for q in grid])
        roots = []
        for i in range(grid_points - 1):
            if values[i] == 0.0:
                roots.append(float(grid[i]))
            elif values[i] * values[i + 1] < 0:
                root = _bracketed_newton(problem, float(grid[i]), float(grid[i + 1]), max_iter)
                if root is not None:
                    roots.append(root)
        if not roots:
            raise NoConvergence(
                f"no fixed point converged for nominal detunings {tuple(nominal_detunings)}"
            )

    merged: List[float] = []
    for q in sorted(roots):
        if merged and abs(q - merged[-1]) <= FIXED_POINT_DEDUP_RTOL * max(abs(q), abs(merged[-1]), 1e-300):
            continue
        merged.append(q)

    solutions = []
    for q in merged:
        delta = problem.detunings(q)
        local = with_overrides(params, delta_a=delta[0], delta_b=delta[1])
        derived = derive(local)
        report = stability(build_drift(derived, local))
        solutions.append(
            FixedPoint(
                delta_a=float(delta[0]),
                delta_b=float(delta[1]),
                alpha_a=derived.alpha_s.a,
                alpha_b=derived.alpha_s.b,
                q_s=derived.q_s,
                stable=report.stable,
                margin=report.margin,
            )
        )
    logger.debug(f"{len(solutions)} fixed point(s) for nominal detunings {tuple(nominal_detunings)}")
    return solutions
