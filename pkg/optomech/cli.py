"""
Command-line front end.

    python main.py stability   [--config FILE] [--preset NAME | --sweep FILE] [--points N] [--x-range LO HI]
    python main.py negativity  ... [--log2]
    python main.py tripartite  ...
    python main.py reconstruct [--config FILE] [--t-m S] [--samples M] [--seed U64]
    python main.py oracle      [--config DESK_FILE] [--seed U64]
    python main.py point       [--config FILE] [--delta-a X] [--delta-b X] [--p-b X]
    python main.py schema      {point,reconstruction,oracle,parameters,desk,sweep}

Data products go to --out (CSV, SVG, JSON); their paths are printed on
stdout. Logs go to stderr. Exit status: 0 success, 2 configuration or usage
error, 3 numerical failure.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .config import get_settings
from .errors import NumericalError, OptomechError, UnstableSystem, UsageError
from .gaussian import check_physicality, entanglement_report, log_negativity, reduced_cm
from .io_relations import (
    MeasurementConfig,
    estimate_cm,
    log_negativity_stderr,
    output_cm,
    reconstruct_intracavity,
    samples_to_csv,
    simulate_homodyne,
)
from .logger import get_logger, log_execution_time, setup_logger
from .model import SystemParams, with_overrides
from .parameters import DeskConfig, ParameterFile, SweepFile, load_desk, load_parameters, load_sweep
from .plots import negativity_lines, stability_heatmap
from .reports import SCHEMAS, OracleReport, PointReport, ReconstructionReport, matrix_to_list
from .sde_oracle import IntegratorConfig, compare_to_lyapunov, desk_kernel
from .steady_state import steady_state_at
from .sweeps import (
    PRESETS,
    STABILITY_COLUMNS,
    TRIPARTITE_COLUMNS,
    SweepSpec,
    evaluate_grid,
    negativity_columns,
    negativity_row,
    preset,
    spec_from_file,
    stability_row,
    tripartite_row,
    write_csv,
)

logger = get_logger("cli")

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_CONFIG = DATA_DIR / "laboratory.json"
DEFAULT_DESK = DATA_DIR / "desk.json"

DEFAULT_PRESETS = {
    "stability": "stability-map",
    "negativity": "backaction",
    "tripartite": "extended",
}

# Above this the E_N^ab estimate is reported as low confidence (nats)
LOW_CONFIDENCE_STDERR = 0.1
BAND_SIGMAS = 3.0

SCHEMA_MODELS = {
    **SCHEMAS,
    "parameters": ParameterFile,
    "desk": DeskConfig,
    "sweep": SweepFile,
}


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optomech",
        description="Steady state, stability and entanglement of two cavities sharing a movable mirror.",
    )
    parser.add_argument("--log-level", default=None, help="override OPTOMECH_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="parameter file (JSON)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed")

    point_args = argparse.ArgumentParser(add_help=False)
    point_args.add_argument("--delta-a", type=float, default=None, help="effective detuning of A, units of omega_m")
    point_args.add_argument("--delta-b", type=float, default=None, help="effective detuning of B, units of omega_m")
    point_args.add_argument("--p-b", type=float, default=None, help="power of B, units of P_a")

    sweep_args = argparse.ArgumentParser(add_help=False)
    sweep_args.add_argument("--preset", choices=PRESETS, default=None)
    sweep_args.add_argument("--sweep", type=Path, default=None, help="sweep file (JSON), replaces --preset")
    sweep_args.add_argument("--points", type=int, default=41, help="points per ranged axis")
    sweep_args.add_argument("--x-range", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    sweep_args.add_argument("--workers", type=int, default=None, help="grid threads (OPTOMECH_WORKERS)")

    commands.add_parser("stability", parents=[common, sweep_args], help="C1, C2 and stability margin over a grid")
    negativity = commands.add_parser(
        "negativity", parents=[common, sweep_args], help="pairwise logarithmic negativities over a grid"
    )
    negativity.add_argument("--log2", action="store_true", help="report E_N in base 2")
    commands.add_parser("tripartite", parents=[common, sweep_args], help="1|2 NPT flags over a grid")

    reconstruct = commands.add_parser(
        "reconstruct", parents=[common, point_args], help="simulated homodyne reconstruction of V_ab"
    )
    reconstruct.add_argument("--t-m", type=float, default=None, help="acquisition time in s (default 1/kappa)")
    reconstruct.add_argument("--samples", type=int, default=100_000, help="shots per phase setting")
    reconstruct.add_argument("--save-samples", action="store_true", help="also write the raw shots as CSV")

    oracle = commands.add_parser("oracle", parents=[common], help="Lyapunov vs stochastic integration")
    oracle.add_argument("--dt", type=float, default=None, help="override the integrator step")
    oracle.add_argument("--trajectories", type=int, default=None, help="override the ensemble size")

    commands.add_parser("point", parents=[common, point_args], help="full report at one working point")

    schema = commands.add_parser("schema", help="print the JSON schema of a report or input file")
    schema.add_argument("kind", choices=sorted(SCHEMA_MODELS))
    return parser


# ============================================
# HELPERS
# ============================================


def _load_point_params(args: argparse.Namespace) -> SystemParams:
    params = load_parameters(args.config or DEFAULT_CONFIG)
    omega_m = params.mirror.omega_m
    return with_overrides(
        params,
        delta_a=args.delta_a * omega_m if args.delta_a is not None else None,
        delta_b=args.delta_b * omega_m if args.delta_b is not None else None,
        p_b=args.p_b * params.cavity_a.power if args.p_b is not None else None,
    )


def _sweep_spec(args: argparse.Namespace, params: SystemParams) -> SweepSpec:
    if args.sweep is not None:
        if args.preset is not None or args.x_range is not None:
            raise UsageError("--sweep cannot be combined with --preset or --x-range")
        return spec_from_file(load_sweep(args.sweep), params)
    name = args.preset or DEFAULT_PRESETS[args.command]
    x_range = tuple(args.x_range) if args.x_range is not None else None
    return preset(name, params, args.points, x_range)


def _workers(args: argparse.Namespace) -> int:
    workers = args.workers if args.workers is not None else get_settings().workers
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    return workers


def _write_json(model, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def assess_reconstruction(en_true: float, en_estimate: float, en_stderr: float, physical: bool) -> Tuple[bool, bool]:
    """(within the 3-stderr band, low confidence)"""
    finite = math.isfinite(en_estimate) and math.isfinite(en_stderr)
    within_band = finite and abs(en_estimate - en_true) <= BAND_SIGMAS * en_stderr + 1e-12
    low_confidence = en_stderr > LOW_CONFIDENCE_STDERR or not physical
    return within_band, low_confidence


def _emit(paths: Sequence[Path]) -> None:
    for path in paths:
        print(path)


# ============================================
# COMMANDS
# ============================================


@log_execution_time()
def cmd_stability(args: argparse.Namespace) -> int:
    params = load_parameters(args.config or DEFAULT_CONFIG)
    spec = _sweep_spec(args, params)
    points = evaluate_grid(params, spec, workers=_workers(args), entanglement=False)
    unstable = sum(not p.stable for p in points)
    if unstable:
        logger.info(f"{unstable} of {len(points)} grid points are unstable")
    csv_path = write_csv([stability_row(p) for p in points], STABILITY_COLUMNS, args.out / "stability.csv")
    svg_path = stability_heatmap(points, spec, args.out / "stability.svg")
    _emit([csv_path, svg_path])
    return 0


@log_execution_time()
def cmd_negativity(args: argparse.Namespace) -> int:
    params = load_parameters(args.config or DEFAULT_CONFIG)
    spec = _sweep_spec(args, params)
    points = evaluate_grid(params, spec, workers=_workers(args))
    rows = [negativity_row(p, log2=args.log2) for p in points]
    csv_path = write_csv(rows, negativity_columns(args.log2), args.out / "negativity.csv")
    svg_path = negativity_lines(points, spec, args.out / "negativity.svg", log2=args.log2)
    _emit([csv_path, svg_path])
    return 0


@log_execution_time()
def cmd_tripartite(args: argparse.Namespace) -> int:
    params = load_parameters(args.config or DEFAULT_CONFIG)
    spec = _sweep_spec(args, params)
    points = evaluate_grid(params, spec, workers=_workers(args))
    csv_path = write_csv([tripartite_row(p) for p in points], TRIPARTITE_COLUMNS, args.out / "tripartite.csv")
    _emit([csv_path])
    return 0


@log_execution_time()
def cmd_point(args: argparse.Namespace) -> int:
    params = _load_point_params(args)
    point = steady_state_at(params)
    entanglement = physical = nu_min = None
    if point.covariance is not None:
        physical, nu_min = check_physicality(point.covariance)
        entanglement = entanglement_report(point.covariance)
    else:
        logger.warning(f"working point is unstable (margin {point.stability.margin:.3e} rad/s); no covariance")
    report = PointReport.of(point, entanglement, physical, nu_min)
    _emit([_write_json(report, args.out / "point.json")])
    return 0


@log_execution_time()
def cmd_reconstruct(args: argparse.Namespace) -> int:
    params = _load_point_params(args)
    kappa = params.cavity_a.kappa
    if not math.isclose(kappa, params.cavity_b.kappa, rel_tol=1e-12):
        raise UsageError("reconstruction assumes equal cavity decay rates")
    t_m = args.t_m if args.t_m is not None else 1.0 / kappa
    if not t_m > 0:
        raise UsageError(f"--t-m must be > 0 (got {t_m})")
    if args.samples < 2:
        raise UsageError(f"--samples must be >= 2 (got {args.samples})")

    point = steady_state_at(params)
    if point.covariance is None:
        raise UnstableSystem(f"working point is unstable (margin {point.stability.margin:.3e} rad/s)")
    v_ab = reduced_cm(point.covariance, ("a", "b"))

    config = MeasurementConfig(t_m=t_m, kappa=kappa, samples_per_setting=args.samples, seed=args.seed)
    v_out = output_cm(v_ab, kappa, t_m)
    samples = simulate_homodyne(v_out, config)
    outputs: List[Path] = []
    if args.save_samples:
        args.out.mkdir(parents=True, exist_ok=True)
        samples_path = args.out / "homodyne_samples.csv"
        samples_to_csv(samples, samples_path)
        outputs.append(samples_path)

    estimate = estimate_cm(samples)
    reconstruction = reconstruct_intracavity(estimate.mean, kappa, t_m)
    en_true = log_negativity(v_ab)
    en_estimate, en_stderr = log_negativity_stderr(estimate, kappa, t_m)

    within_band, low_confidence = assess_reconstruction(en_true, en_estimate, en_stderr, reconstruction.physical)
    if low_confidence:
        logger.warning(f"low-confidence estimate: E_N^ab = {en_estimate:.4g} +/- {en_stderr:.2g}")

    report = ReconstructionReport(
        t_m=t_m,
        kappa=kappa,
        samples_per_setting=args.samples,
        seed=args.seed,
        phase_grid=[tuple(s) for s in config.phase_grid],
        v_ab_true=matrix_to_list(v_ab),
        v_ab_estimate=matrix_to_list(reconstruction.cm),
        v_ab_stderr=matrix_to_list(estimate.stderr / (2.0 * kappa * t_m)),
        v_out_true=matrix_to_list(v_out),
        v_out_estimate=matrix_to_list(estimate.mean),
        v_out_stderr=matrix_to_list(estimate.stderr),
        condition=estimate.condition,
        en_true=en_true,
        en_estimate=en_estimate if math.isfinite(en_estimate) else None,
        en_stderr=en_stderr if math.isfinite(en_stderr) else None,
        physical=reconstruction.physical,
        nu_min=reconstruction.nu_min,
        within_band=within_band,
        low_confidence=low_confidence,
        passed=within_band,
    )
    outputs.append(_write_json(report, args.out / "reconstruct.json"))
    _emit(outputs)
    return 0


@log_execution_time()
def cmd_oracle(args: argparse.Namespace) -> int:
    desk = load_desk(args.config or DEFAULT_DESK)
    settings = desk.integrator
    K, N = desk_kernel(
        omega_m=desk.omega_m,
        gamma_m=desk.gamma_m,
        nbar=desk.nbar,
        kappa=(desk.kappa_a, desk.kappa_b),
        delta=(desk.delta_a, desk.delta_b),
        g_eff=(desk.g_a, desk.g_b),
    )
    n_trajectories = args.trajectories if args.trajectories is not None else settings.n_trajectories
    config = IntegratorConfig(
        dt=args.dt if args.dt is not None else settings.dt,
        t_total=settings.t_total,
        burn_in=settings.burn_in,
        n_trajectories=n_trajectories,
        seed=args.seed,
        n_batches=settings.n_batches,
        sample_every=settings.sample_every,
    )
    comparison = compare_to_lyapunov(K, N, config)
    report = OracleReport(
        omega_m=desk.omega_m,
        gamma_m=desk.gamma_m,
        nbar=desk.nbar,
        kappa=(desk.kappa_a, desk.kappa_b),
        delta=(desk.delta_a, desk.delta_b),
        g_eff=(desk.g_a, desk.g_b),
        dt=config.dt,
        t_total=config.t_total,
        n_trajectories=config.n_trajectories,
        n_samples=comparison.ensemble.n_samples,
        seed=config.seed,
        lyapunov=matrix_to_list(comparison.lyapunov),
        ensemble=matrix_to_list(comparison.ensemble.matrix),
        ensemble_stderr=matrix_to_list(comparison.ensemble.stderr),
        distance=comparison.distance,
        tolerance=comparison.tolerance,
        passed=comparison.passed,
    )
    _emit([_write_json(report, args.out / "oracle.json")])
    if not comparison.passed:
        logger.error(f"oracle mismatch: distance {comparison.distance:.4f} > tolerance {comparison.tolerance:.4f}")
        return NumericalError.exit_code
    return 0


def cmd_schema(args: argparse.Namespace) -> int:
    schema = SCHEMA_MODELS[args.kind].model_json_schema()
    print(json.dumps(schema, indent=2, sort_keys=True))
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "stability": cmd_stability,
    "negativity": cmd_negativity,
    "tripartite": cmd_tripartite,
    "reconstruct": cmd_reconstruct,
    "oracle": cmd_oracle,
    "point": cmd_point,
    "schema": cmd_schema,
}


def _apply_log_level(level_name: Optional[str]) -> None:
    if level_name is None:
        return
    level = logging.getLevelName(level_name.upper())
    if not isinstance(level, int):
        raise UsageError(f"unknown log level {level_name!r}")
    root = setup_logger()
    root.setLevel(level)
    for handler in root.handlers:
        handler.setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_log_level(args.log_level)
        logger.info(f"running {args.command}", extra={"command": args.command})
        return COMMANDS[args.command](args)
    except OptomechError as e:
        logger.error(f"{type(e).__name__}: {e}", extra={"command": args.command})
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
