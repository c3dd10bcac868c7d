#!/usr/bin/env python3

import argparse
import math
import os
import subprocess
import sys
import time
from dataclasses import asdict
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.config import (
    ROUND_MODES,
    Config,
    get_config_dir,
    load_config_from_user_dir,
)
from src.curves import CURVE_KINDS, parse_grid, power_curve
from src.dist import ErrorSpec
from src.exceptions import (
    BracketError,
    DegenerateSampleError,
    DomainError,
    InfeasibleTableError,
    UnattainableError,
)
from src.output import OUTPUT_FORMATS, OutputGenerator
from src.power import (
    AssignmentMode,
    AssumptionSet,
    CovariateAdjust,
    DesignPoint,
    late_power_bounds,
    mdes,
    required_n,
    round_sample_size,
)
from src.sim.diagnostics import load_table, stratum_means_from_table
from src.sim.engine import BOUNDS_COLUMNS, MonteCarloEngine, SimConfig
from src.sim.strata import kappa_of_spec, load_spec
from src.tables import TABLE_NAMES, TableBuilder
from src.utils.logger import setup_logger

Document = Any
Result = Tuple[Document, Optional[List[str]]]

ENV_TEMPLATE = """# Error rates and assignment
LATE_POWER_ALPHA=0.05
LATE_POWER_BETA=0.2
LATE_POWER_PZ=0.5

# Simulation
LATE_POWER_REPS=5000
LATE_POWER_SWEEP_REPS=10000
LATE_POWER_SEED=20240611
LATE_POWER_THREADS=0
LATE_POWER_CHUNK_SIZE=250
LATE_POWER_MAX_REDRAWS=100
LATE_POWER_REDRAW_WARN=0.01
LATE_POWER_PROGRESS=0

# Sample-size tables
LATE_POWER_ROUND=ceil
LATE_POWER_OUTCOME_SD=16758.8

# Logging
LOG_LEVEL=INFO
"""

DEFAULT_FORMATS = {"validate": "csv", "tables": "csv", "curves": "csv"}


def init_command() -> int:
    """Write a default ~/.late-power/.env"""
    config_dir = get_config_dir()
    config_dir.mkdir(parents=True, exist_ok=True)
    env_path = config_dir / ".env"

    if env_path.exists():
        print(f"⚠️  Configuration already exists at {env_path}")
        response = input("Reinitialize? (y/N): ").strip().lower()
        if response != "y":
            print("✅ Keeping existing configuration")
            return 0

    with open(env_path, "w", encoding="utf-8") as f:
        f.write(ENV_TEMPLATE)
    print(f"✅ Configuration saved to: {env_path}")
    return 0


def config_command() -> int:
    """Open the configuration file in $EDITOR"""
    env_path = get_config_dir() / ".env"
    if not env_path.exists():
        print(f"❌ No configuration found at {env_path}", file=sys.stderr)
        print("Run 'late-power init' first", file=sys.stderr)
        return 1

    editor = os.environ.get("EDITOR", "nano")
    try:
        subprocess.run([editor, str(env_path)], check=True)
    except (subprocess.CalledProcessError, FileNotFoundError):
        print(f"❌ Could not open editor '{editor}'", file=sys.stderr)
        print(f"Please manually edit: {env_path}", file=sys.stderr)
        return 1
    return 0


def _add_error_flags(parser: argparse.ArgumentParser, beta: bool) -> None:
    parser.add_argument(
        "--alpha", type=float, help="Test level (default: 0.05)"
    )
    if beta:
        parser.add_argument(
            "--beta", type=float, help="Type-II error (default: 0.2)"
        )


def _add_design_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--pi", type=float, required=True, help="Complier share in (0, 1]"
    )
    parser.add_argument(
        "--pz", type=float, help="Assignment probability (default: 0.5)"
    )
    parser.add_argument(
        "--mode",
        choices=["auto", "equal", "general"],
        default="auto",
        help="Bound regime; auto picks equal at p_z = 0.5 (default: auto)",
    )


def _add_covariate_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--r2dw", type=float, help="R^2 of uptake on covariates, in [0, 1)"
    )
    parser.add_argument(
        "--r2yw", type=float, help="R^2 of outcome on covariates, in [0, 1)"
    )


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--reps", type=int, help="Replications")
    parser.add_argument("--seed", type=int, help="Reproducibility seed")
    parser.add_argument(
        "--threads",
        type=int,
        help="Simulation workers (0 = one per CPU, default: from config)",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=OUTPUT_FORMATS,
        help="Output format (default: text; csv for tabular commands)",
    )
    common.add_argument("--output", help="Write the document to this file")
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )

    parser = argparse.ArgumentParser(
        prog="late-power",
        description="Power analysis for the local average treatment effect",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  late-power power --kappa 0.2 --pi 0.5 --n 1500 --ordered
  late-power mdes --pi 0.4 --n 5000 --beta 0.2
  late-power n --kappa 0.10 --pi 0.63 --pz 0.67 --round nearest
  late-power simulate --spec spec.json --reps 5000 --seed 1
  late-power validate --spec template.json --kappa-grid 0.05:0.5:0.05
  late-power tables --which 1
  late-power diagnose --table cells.json --format json
  late-power curves --kind power-by-kappa --pi 0.5 --fixed 1500 \\
      --grid 0:0.5:0.05
        """,
    )
    subparsers = parser.add_subparsers(
        dest="command", help="Available commands", required=True
    )

    subparsers.add_parser("init", help="Write a default configuration file")
    subparsers.add_parser("config", help="Open configuration file in editor")

    power_parser = subparsers.add_parser(
        "power", parents=[common], help="Bounds on LATE power"
    )
    power_parser.add_argument(
        "--kappa", type=float, required=True, help="Effect size"
    )
    power_parser.add_argument(
        "--n", type=float, required=True, help="Sample size"
    )
    _add_design_flags(power_parser)
    _add_error_flags(power_parser, beta=False)
    power_parser.add_argument(
        "--ordered",
        action="store_true",
        help="Also report the ordered-means lower bound",
    )
    _add_covariate_flags(power_parser)

    mdes_parser = subparsers.add_parser(
        "mdes", parents=[common], help="Minimum detectable effect size"
    )
    mdes_parser.add_argument(
        "--n", type=float, required=True, help="Sample size"
    )
    _add_design_flags(mdes_parser)
    _add_error_flags(mdes_parser, beta=True)
    _add_covariate_flags(mdes_parser)

    n_parser = subparsers.add_parser(
        "n", parents=[common], help="Required sample size"
    )
    n_parser.add_argument(
        "--kappa", type=float, required=True, help="Effect size"
    )
    _add_design_flags(n_parser)
    _add_error_flags(n_parser, beta=True)
    n_parser.add_argument(
        "--round",
        choices=ROUND_MODES,
        help="Rounding of sample sizes (default: ceil)",
    )
    _add_covariate_flags(n_parser)

    simulate_parser = subparsers.add_parser(
        "simulate", parents=[common], help="Monte-Carlo power of a spec"
    )
    simulate_parser.add_argument(
        "--spec", required=True, help="StrataSpec JSON file"
    )
    simulate_parser.add_argument("--n", type=int, help="Sample size")
    _add_error_flags(simulate_parser, beta=False)
    _add_sim_flags(simulate_parser)

    validate_parser = subparsers.add_parser(
        "validate",
        parents=[common],
        help="Simulated power against the analytic bounds on a kappa grid",
    )
    validate_parser.add_argument(
        "--spec", required=True, help="StrataSpec template JSON file"
    )
    validate_parser.add_argument(
        "--kappa-grid", required=True, help="Grid as start:stop:step"
    )
    validate_parser.add_argument("--n", type=int, help="Sample size")
    validate_parser.add_argument(
        "--mode",
        choices=["auto", "equal", "general"],
        default="auto",
        help="Bound regime (default: auto)",
    )
    _add_error_flags(validate_parser, beta=False)
    _add_sim_flags(validate_parser)

    tables_parser = subparsers.add_parser(
        "tables", parents=[common], help="Regenerate a published table"
    )
    tables_parser.add_argument(
        "--which", choices=TABLE_NAMES, required=True, help="Table name"
    )
    tables_parser.add_argument(
        "--outcome-sd",
        type=float,
        help="Outcome SD for the tau column of tables 1 and 2",
    )
    tables_parser.add_argument(
        "--round",
        choices=ROUND_MODES,
        default="nearest",
        help="Rounding for tables 1 and 2 (default: nearest)",
    )
    _add_error_flags(tables_parser, beta=True)
    _add_sim_flags(tables_parser)

    diagnose_parser = subparsers.add_parser(
        "diagnose", parents=[common], help="Stratum means of a (Z, D) table"
    )
    diagnose_parser.add_argument(
        "--table", required=True, help="ObservedTable JSON file"
    )

    curves_parser = subparsers.add_parser(
        "curves", parents=[common], help="Plot-ready bound curves"
    )
    curves_parser.add_argument(
        "--kind", choices=CURVE_KINDS, required=True, help="Curve kind"
    )
    curves_parser.add_argument(
        "--grid", required=True, help="Grid as start:stop:step"
    )
    curves_parser.add_argument(
        "--fixed",
        type=float,
        help="N for power-by-kappa, kappa for power-by-n",
    )
    _add_design_flags(curves_parser)
    _add_error_flags(curves_parser, beta=True)

    return parser


def _check(parser, ok: bool, message: str) -> None:
    if not ok:
        parser.error(message)


def validate_args(parser, args, config: Config) -> None:
    """Check flags against module preconditions and fold them into config"""
    if getattr(args, "alpha", None) is not None:
        _check(parser, 0 < args.alpha < 1, "--alpha must lie in (0, 1)")
        config.ALPHA = args.alpha
    if getattr(args, "beta", None) is not None:
        _check(parser, 0 < args.beta < 1, "--beta must lie in (0, 1)")
        config.BETA = args.beta
    if getattr(args, "pz", None) is not None:
        _check(parser, 0 < args.pz < 1, "--pz must lie in (0, 1)")
        config.P_Z = args.pz
    if getattr(args, "pi", None) is not None:
        _check(parser, 0 < args.pi <= 1, "--pi must lie in (0, 1]")
    if getattr(args, "n", None) is not None:
        _check(parser, args.n > 0, "--n must be positive")
    if getattr(args, "kappa", None) is not None:
        _check(parser, math.isfinite(args.kappa), "--kappa must be finite")
    for flag in ("r2dw", "r2yw"):
        value = getattr(args, flag, None)
        if value is not None:
            _check(parser, 0 <= value < 1, f"--{flag} must lie in [0, 1)")
    if getattr(args, "mode", None) == "equal":
        _check(
            parser,
            abs(config.P_Z - 0.5) <= 1e-12,
            "--mode equal requires --pz 0.5",
        )
    if getattr(args, "reps", None) is not None:
        _check(parser, args.reps >= 1, "--reps must be at least 1")
    if getattr(args, "seed", None) is not None:
        _check(parser, args.seed >= 0, "--seed must be nonnegative")
    if getattr(args, "threads", None) is not None:
        _check(parser, args.threads >= 0, "--threads must be >= 0")
        config.THREADS = args.threads
    if getattr(args, "round", None) is not None and args.command == "n":
        config.ROUND_MODE = args.round
    if getattr(args, "outcome_sd", None) is not None:
        _check(parser, args.outcome_sd > 0, "--outcome-sd must be positive")
        config.OUTCOME_SD = args.outcome_sd

    if args.command == "n":
        _check(parser, args.kappa != 0, "--kappa must be nonzero for n")
    if args.command == "mdes":
        _check(
            parser, config.BETA < 0.5, "--beta must be below 0.5 for mdes"
        )
    if args.command == "curves":
        if args.kind.startswith("power-by"):
            _check(
                parser,
                args.fixed is not None and args.fixed > 0,
                f"--fixed (positive) is required for {args.kind}",
            )
        if args.kind == "mdes-by-n":
            _check(
                parser,
                config.BETA < 0.5,
                "--beta must be below 0.5 for mdes-by-n",
            )
    if args.log_level:
        config.LOG_LEVEL = args.log_level


def _assumptions(args, config: Config, ordered: bool = False):
    if args.mode == "auto":
        return AssumptionSet.for_assignment(config.P_Z, ordered)
    return AssumptionSet(AssignmentMode(args.mode), ordered)


def _covariates(args) -> Optional[CovariateAdjust]:
    if args.r2dw is None and args.r2yw is None:
        return None
    return CovariateAdjust(r2_dw=args.r2dw or 0.0, r2_yw=args.r2yw or 0.0)


def _covariate_fields(covariates: Optional[CovariateAdjust]) -> Dict:
    if covariates is None:
        return {}
    return {"r2_dw": covariates.r2_dw, "r2_yw": covariates.r2_yw}


def power_command(args, config: Config) -> Result:
    assumptions = _assumptions(args, config, args.ordered)
    covariates = _covariates(args)
    bounds = late_power_bounds(
        DesignPoint(args.kappa, args.pi, args.n, config.P_Z),
        assumptions,
        ErrorSpec(config.ALPHA, config.BETA),
        covariates,
    )
    document = {
        "kappa": args.kappa,
        "pi": args.pi,
        "n": args.n,
        "p_z": config.P_Z,
        "alpha": config.ALPHA,
        "mode": assumptions.mode.value,
        "lower": bounds.lower,
        "upper": bounds.upper,
        **_covariate_fields(covariates),
    }
    if args.ordered:
        document["ordered_lower"] = bounds.ordered_lower
    return document, None


def mdes_command(args, config: Config) -> Result:
    assumptions = _assumptions(args, config)
    covariates = _covariates(args)
    solved = mdes(
        args.pi,
        args.n,
        config.P_Z,
        assumptions,
        ErrorSpec(config.ALPHA, config.BETA),
        covariates,
    )
    document = {
        "pi": args.pi,
        "n": args.n,
        "p_z": config.P_Z,
        "alpha": config.ALPHA,
        "beta": config.BETA,
        "mode": assumptions.mode.value,
        "kappa_low": solved.kappa_low,
        "kappa_high": solved.kappa_high,
        "kappa_star": solved.kappa_star,
        "status": "ok" if solved.attainable else "unattainable",
        **_covariate_fields(covariates),
    }
    if not solved.attainable:
        raise UnattainableError(
            f"power {1 - config.BETA:g} is not reachable at N={args.n:g} "
            f"with pi={args.pi:g}",
            document,
        )
    return document, None


def n_command(args, config: Config) -> Result:
    assumptions = _assumptions(args, config)
    covariates = _covariates(args)
    solved = required_n(
        args.kappa,
        args.pi,
        config.P_Z,
        assumptions,
        ErrorSpec(config.ALPHA, config.BETA),
        covariates,
    )
    mode = config.ROUND_MODE
    document = {
        "kappa": args.kappa,
        "pi": args.pi,
        "p_z": config.P_Z,
        "alpha": config.ALPHA,
        "beta": config.BETA,
        "mode": assumptions.mode.value,
        "round": mode,
        "n_low": round_sample_size(solved.n_low, mode),
        "n_high": round_sample_size(solved.n_high, mode),
        "n_star": round_sample_size(solved.n_star, mode),
        "n_low_exact": solved.n_low,
        "n_high_exact": solved.n_high,
        "n_star_exact": solved.n_star,
        **_covariate_fields(covariates),
    }
    return document, None


def _sim_config(args, file_config: Dict[str, Any], config: Config, reps):
    merged = dict(file_config)
    for key, value in (
        ("n", args.n),
        ("reps", args.reps),
        ("seed", args.seed),
        ("alpha", args.alpha),
    ):
        if value is not None:
            merged[key] = value
    merged.setdefault("reps", reps)
    merged.setdefault("seed", config.SEED)
    merged.setdefault("alpha", config.ALPHA)
    if "n" not in merged:
        raise DomainError("a sample size is required (--n or config.n)")
    return SimConfig.from_dict(merged)


def simulate_command(args, config: Config) -> Result:
    spec, file_config = load_spec(args.spec)
    cfg = _sim_config(args, file_config, config, config.REPS)
    engine = MonteCarloEngine(config, workers=config.resolve_workers())
    result = engine.simulate_power(spec, cfg)
    document = {
        "kappa": kappa_of_spec(spec),
        "tau": spec.tau,
        "pi": spec.p_c,
        "alpha": cfg.alpha,
        "seed": cfg.seed,
        **result.to_dict(),
    }
    return document, None


def validate_command(args, config: Config) -> Result:
    template, file_config = load_spec(args.spec)
    grid = parse_grid(args.kappa_grid)
    if grid[0] <= 0:
        raise DomainError("--kappa-grid values must be positive")
    cfg = _sim_config(args, file_config, config, config.SWEEP_REPS)
    mode = None if args.mode == "auto" else AssignmentMode(args.mode)
    engine = MonteCarloEngine(config, workers=config.resolve_workers())
    checks = engine.validate_bounds(
        template, grid, cfg, ErrorSpec(alpha=cfg.alpha), mode=mode
    )
    return [asdict(check) for check in checks], BOUNDS_COLUMNS


def tables_command(args, config: Config) -> Result:
    builder = TableBuilder(config, workers=config.resolve_workers())
    rows = builder.build(
        args.which,
        reps=args.reps,
        seed=args.seed,
        alpha=args.alpha,
        beta=args.beta,
        outcome_sd=args.outcome_sd,
        round_mode=args.round,
    )
    return rows, None


def diagnose_command(args, config: Config) -> Result:
    table = load_table(args.table)
    return asdict(stratum_means_from_table(table)), None


def curves_command(args, config: Config) -> Result:
    grid = parse_grid(args.grid)
    rows = power_curve(
        args.kind,
        grid,
        args.pi,
        args.fixed,
        p_z=config.P_Z,
        assumptions=_assumptions(args, config),
        err=ErrorSpec(config.ALPHA, config.BETA),
    )
    return rows, None


COMMANDS = {
    "power": power_command,
    "mdes": mdes_command,
    "n": n_command,
    "simulate": simulate_command,
    "validate": validate_command,
    "tables": tables_command,
    "diagnose": diagnose_command,
    "curves": curves_command,
}


def _emit(
    output_generator: OutputGenerator,
    args,
    document: Document,
    columns: Optional[Sequence[str]] = None,
) -> None:
    format_type = args.format or DEFAULT_FORMATS.get(args.command, "text")
    content = output_generator.generate_output(document, format_type, columns)
    if args.output:
        output_generator.write_output(content, args.output)
    else:
        sys.stdout.write(content)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.command == "init":
        return init_command()
    if args.command == "config":
        return config_command()

    config = Config()
    load_config_from_user_dir()
    config.reload_from_env()
    try:
        config.validate()
    except ValueError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return 2

    try:
        validate_args(parser, args, config)
    except SystemExit as e:
        return int(e.code or 0)

    logger = setup_logger("src", config.LOG_LEVEL)
    output_generator = OutputGenerator(config)
    logger.debug(f"Running {args.command}")
    started = time.perf_counter()

    try:
        document, columns = COMMANDS[args.command](args, config)
        _emit(output_generator, args, document, columns)
        logger.debug(
            f"{args.command} finished in {time.perf_counter() - started:.2f}s"
        )
        return 0
    except UnattainableError as e:
        _emit(output_generator, args, e.details)
        print(f"❌ Unattainable: {e.reason}", file=sys.stderr)
        return 1
    except InfeasibleTableError as e:
        _emit(
            output_generator,
            args,
            {"status": "infeasible", "reason": str(e)},
        )
        print(f"❌ Infeasible table: {e}", file=sys.stderr)
        return 1
    except (BracketError, DegenerateSampleError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 1
    except DomainError as e:
        print(f"❌ Invalid input: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("\n❌ Interrupted by user", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
