from .errors import (
    ConfigError,
    NumericalError,
    OptomechError,
    ParameterError,
    UsageError,
)
from .model import (
    CavityLabel,
    CavityParams,
    DerivedQuantities,
    FixedPoint,
    MirrorParams,
    PhysicalConstants,
    SystemParams,
    derive,
    solve_operating_point,
    with_overrides,
)
from .dynamics import (
    DriftMatrix,
    NoiseMatrix,
    StabilityReport,
    build_drift,
    build_noise,
    characteristic_polynomial,
    routh_hurwitz,
    stability,
)
from .steady_state import (
    CovarianceMatrix,
    OperatingPoint,
    solve_lyapunov,
    steady_state_at,
)
from .gaussian import (
    EntanglementReport,
    log_negativity,
    partial_transpose,
    reduced_cm,
    symplectic_eigenvalues,
    symplectic_spectrum_2mode_closed_form,
    tripartite_npt,
)
from .io_relations import (
    EstimatedCM,
    MeasurementConfig,
    estimate_cm,
    output_cm,
    reconstruct_intracavity,
    simulate_homodyne,
)
from .sde_oracle import (
    IntegratorConfig,
    integrate_ensemble,
    weak_convergence_check,
)
from .parameters import load_desk, load_parameters

__all__ = [
    # Errors
    "ConfigError",
    "NumericalError",
    "OptomechError",
    "ParameterError",
    "UsageError",
    # Model
    "CavityLabel",
    "CavityParams",
    "DerivedQuantities",
    "FixedPoint",
    "MirrorParams",
    "PhysicalConstants",
    "SystemParams",
    "derive",
    "solve_operating_point",
    "with_overrides",
    # Dynamics
    "DriftMatrix",
    "NoiseMatrix",
    "StabilityReport",
    "build_drift",
    "build_noise",
    "characteristic_polynomial",
    "routh_hurwitz",
    "stability",
    # Steady state
    "CovarianceMatrix",
    "OperatingPoint",
    "solve_lyapunov",
    "steady_state_at",
    # Entanglement
    "EntanglementReport",
    "log_negativity",
    "partial_transpose",
    "reduced_cm",
    "symplectic_eigenvalues",
    "symplectic_spectrum_2mode_closed_form",
    "tripartite_npt",
    # Input-output and homodyne estimation
    "EstimatedCM",
    "MeasurementConfig",
    "estimate_cm",
    "output_cm",
    "reconstruct_intracavity",
    "simulate_homodyne",
    # Stochastic cross-check
    "IntegratorConfig",
    "integrate_ensemble",
    "weak_convergence_check",
    # Parameter files
    "load_desk",
    "load_parameters",
]
