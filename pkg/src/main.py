import argparse
import sys
from typing import Callable

import numpy as np
from colorama import init
from dotenv import load_dotenv
from pydantic import ValidationError

from bounds.report import bound_report
from core.errors import DomainError
from data.models import LowerBoundVariant, PathSpec, TimeMode, Verdict, WalkParams
from montecarlo.experiment import MIN_TRIALS, inverse_gaussian_check, summarize_overshoot, summarize_trials, sweep, trial_frame
from montecarlo.runner import run_trials
from montecarlo.tail import tail_exponent_estimate
from utils.config import ConfigError, describe_validation_error, load_config_file, load_grid_file, output_path, resolve_run_config
from utils.display import error, print_bound_report, print_experiment_summary, print_ks_result, print_overshoot_summary, print_sweep_rows, print_tail_result, warn
from utils.output import OutputError, document, sweep_frame, write_csv, write_json
from utils.progress import progress

# Load environment variables from .env file
load_dotenv()

init(autoreset=True)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CENSORED = 4

# Five checkpoints per decade up to 10^6
DEFAULT_CHECKPOINTS = np.geomspace(1.0, 1e6, 31).tolist()


def _coefficient(value: str) -> float | str:
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a real number, got {value!r}")


def _checkpoints(value: str) -> list[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {value!r}")


##### Commands #####
def cmd_bounds(args: argparse.Namespace) -> int:
    params = WalkParams(s=args.s, eps=args.eps, l=args.l, mode=args.mode, dt=args.dt)
    variant = LowerBoundVariant(args.variant)
    report = bound_report(params, variant, q=args.q, n=args.n)

    config = {"l": params.l, "s": params.s, "eps": params.eps, "mode": params.mode.value, "dt": params.dt, "q": args.q, "n": args.n, "lower_bound_variant": variant.value}
    write_json(document("bounds", config, report), args.output)
    if args.show_table:
        print_bound_report(report)

    if report.failures:
        for failure in report.failures:
            error(failure)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    flags = {
        "s": args.s,
        "eps": args.eps,
        "l": args.l,
        "mode": args.mode,
        "dt": args.dt,
        "t_max": args.t_max,
        "bridge": args.bridge,
        "c": args.c,
        "n_trials": args.trials,
        "master_seed": args.seed,
        "threads": args.threads,
        "lower_bound_variant": args.variant,
        "output_dir": args.output_dir,
        "summary_path": args.output,
        "per_trial_path": args.per_trial,
    }
    config = resolve_run_config(file_values, flags)
    params, est = config.walk_params(), config.estimator()

    outcomes = run_trials(params, est, config.n_trials, config.master_seed, config.threads, "run_experiment")
    summary = summarize_trials(params, est, outcomes, config.lower_bound_variant)

    if config.per_trial_path:
        write_csv(trial_frame(outcomes), output_path(config, config.per_trial_path))
    echoed = config.model_dump(mode="json") | {"c": est.c, "t_max": params.t_max, "dt": params.dt}
    write_json(document("simulate", echoed, summary), output_path(config, config.summary_path))
    if args.show_table:
        print_experiment_summary(summary)

    if summary.verdict == Verdict.INVALID_CENSORING:
        warn(f"{summary.n_censored} of {summary.n_trials} trials were censored (budget 0.1%); raise --t-max")
        return EXIT_CENSORED
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.trials < MIN_TRIALS:
        raise DomainError(f"--trials must be >= {MIN_TRIALS}, got {args.trials}")
    grid = load_grid_file(args.grid_file)
    rows = sweep(grid, args.trials, args.seed, args.threads, LowerBoundVariant(args.variant))

    write_csv(sweep_frame(rows), args.output)
    if args.show_table:
        print_sweep_rows(rows)
    for row in rows:
        if row.error:
            warn(f"row {row.row_index} failed: {row.error}")
    if any(row.summary is not None and row.summary.verdict == Verdict.INVALID_CENSORING for row in rows):
        return EXIT_CENSORED
    return EXIT_OK


def cmd_tailcheck(args: argparse.Namespace) -> int:
    if args.s != 0:
        raise DomainError(f"the tail check needs a driftless walk (s = 0), got s = {args.s}")
    checkpoints = args.checkpoints or DEFAULT_CHECKPOINTS
    result = tail_exponent_estimate(args.h, args.trials, checkpoints, args.seed, dt=args.dt, fine_horizon=args.fine_horizon, growth=args.growth, threads=args.threads)

    config = {"h": args.h, "s": 0.0, "n_trials": args.trials, "checkpoints": checkpoints, "master_seed": args.seed, "dt": args.dt, "fine_horizon": args.fine_horizon, "growth": args.growth, "mode": TimeMode.BROWNIAN.value}
    write_json(document("tailcheck", config, result), args.output)
    if args.show_table:
        print_tail_result(result)
    if result.low_survivors:
        warn("fewer than 100 trials survive the last checkpoint; slope stderr widened")
    return EXIT_OK


def cmd_overshoot(args: argparse.Namespace) -> int:
    spec = PathSpec(step_mean=args.s, step_std=args.sigma, level=args.l)
    summary = summarize_overshoot(spec, args.trials, args.seed, horizon=args.t_max, threads=args.threads)

    config = {"s": spec.step_mean, "sigma": spec.step_std, "l": spec.level, "n_trials": args.trials, "master_seed": args.seed, "t_max": args.t_max}
    write_json(document("overshoot", config, summary), args.output)
    if args.show_table:
        print_overshoot_summary(summary)
    return EXIT_OK


def cmd_igcheck(args: argparse.Namespace) -> int:
    params = WalkParams(s=args.s, eps=0.0, l=args.l, mode=TimeMode.BROWNIAN, dt=args.dt, t_max=args.t_max, bridge=args.bridge)
    result = inverse_gaussian_check(params, args.trials, args.seed, threads=args.threads)

    config = {"s": params.s, "l": params.l, "dt": params.dt, "t_max": params.t_max, "bridge": params.bridge, "n_trials": args.trials, "master_seed": args.seed, "mode": TimeMode.BROWNIAN.value}
    write_json(document("igcheck", config, result), args.output)
    if args.show_table:
        print_ks_result(result)
    return EXIT_OK


##### Argument parsing #####
def _add_walk_flags(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--l", type=float, required=required, help="Crossing level l >= 0")
    parser.add_argument("--s", type=float, required=required, help="Drift per unit time s >= 0")
    parser.add_argument("--eps", type=float, required=required, help="Observation noise scale eps >= 0")
    parser.add_argument("--mode", type=str, choices=[m.value for m in TimeMode], default=None if not required else TimeMode.DISCRETE.value, help="Time model")
    parser.add_argument("--dt", type=float, default=None if not required else 1.0, help="Grid step in brownian mode (ignored in discrete mode)")
    parser.add_argument("--variant", type=str, choices=[v.value for v in LowerBoundVariant], default=None if not required else LowerBoundVariant.PRINTED.value, help="Q argument of the lower bound")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", type=str, default=None, help="Result file (default: standard output)")
    parser.add_argument("--show-table", action="store_true", help="Print a human-readable table on standard error")
    parser.add_argument("--quiet", action="store_true", help="Hide the progress display")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Tracking-stopping-time laboratory")
    commands = parser.add_subparsers(dest="command", required=True)

    bounds = commands.add_parser("bounds", help="Evaluate the closed-form bounds")
    _add_walk_flags(bounds)
    bounds.add_argument("--q", type=float, default=None, help="Regime exponent in (1/2, 1)")
    bounds.add_argument("--n", type=int, default=None, help="Evaluate the lower bound at this n instead of the best one")
    _add_common_flags(bounds)
    bounds.set_defaults(handler=cmd_bounds, stochastic=False)

    simulate = commands.add_parser("simulate", help="Monte Carlo estimate of E|eta - tau| against the bound bracket")
    simulate.add_argument("--config", type=str, default=None, help="JSON config file (flags override it)")
    _add_walk_flags(simulate, required=False)
    simulate.add_argument("--t-max", type=int, default=None, help="Horizon cap in steps")
    simulate.add_argument("--no-bridge", dest="bridge", action="store_false", default=None, help="Brownian mode: detect crossings at grid points only")
    simulate.add_argument("--c", type=_coefficient, default=None, help="Tracking coefficient, or 'auto' for 1/(1+eps^2)")
    simulate.add_argument("--trials", type=int, default=None, help=f"Number of trials (>= {MIN_TRIALS})")
    simulate.add_argument("--seed", type=int, default=None, help="Master seed (required here or in the config)")
    simulate.add_argument("--threads", type=int, default=None, help="Worker processes (default: all cores)")
    simulate.add_argument("--per-trial", type=str, default=None, help="Per-trial CSV file")
    simulate.add_argument("--output-dir", type=str, default=None, help="Directory for relative output paths")
    _add_common_flags(simulate)
    simulate.set_defaults(handler=cmd_simulate, stochastic=True)

    sweep_cmd = commands.add_parser("sweep", help="One experiment per (l, s, eps, c) grid entry")
    sweep_cmd.add_argument("--grid-file", type=str, required=True, help="JSON list of grid entries")
    sweep_cmd.add_argument("--trials", type=int, default=10_000, help="Trials per row")
    sweep_cmd.add_argument("--seed", type=int, required=True, help="Master seed")
    sweep_cmd.add_argument("--threads", type=int, default=None, help="Worker processes (default: all cores)")
    sweep_cmd.add_argument("--variant", type=str, choices=[v.value for v in LowerBoundVariant], default=LowerBoundVariant.PRINTED.value)
    _add_common_flags(sweep_cmd)
    sweep_cmd.set_defaults(handler=cmd_sweep, stochastic=True)

    tail = commands.add_parser("tailcheck", help="Survival tail of driftless Brownian passages")
    tail.add_argument("--h", type=float, default=1.0, help="Level h > 0")
    tail.add_argument("--s", type=float, default=0.0, help="Drift; only s = 0 is accepted")
    tail.add_argument("--trials", type=int, default=100_000, help="Number of trials")
    tail.add_argument("--checkpoints", type=_checkpoints, default=None, help="Comma-separated increasing times")
    tail.add_argument("--seed", type=int, required=True, help="Master seed")
    tail.add_argument("--dt", type=float, default=0.01, help="Grid step near 0")
    tail.add_argument("--fine-horizon", type=float, default=1.0, help="End of the uniform part of the grid")
    tail.add_argument("--growth", type=float, default=1.01, help="Ratio of the geometric part of the grid")
    tail.add_argument("--threads", type=int, default=None, help="Worker processes (default: all cores)")
    _add_common_flags(tail)
    tail.set_defaults(handler=cmd_tailcheck, stochastic=True)

    overshoot = commands.add_parser("overshoot", help="Overshoot moments and Wald bracket of a Gaussian walk")
    overshoot.add_argument("--s", type=float, required=True, help="Step mean > 0")
    overshoot.add_argument("--sigma", type=float, default=1.0, help="Step standard deviation")
    overshoot.add_argument("--l", type=float, required=True, help="Level")
    overshoot.add_argument("--trials", type=int, default=100_000, help="Number of trials")
    overshoot.add_argument("--seed", type=int, required=True, help="Master seed")
    overshoot.add_argument("--t-max", type=int, default=None, help="Horizon cap in steps")
    overshoot.add_argument("--threads", type=int, default=None, help="Worker processes (default: all cores)")
    _add_common_flags(overshoot)
    overshoot.set_defaults(handler=cmd_overshoot, stochastic=True)

    igcheck = commands.add_parser("igcheck", help="Brownian passage times against the inverse-Gaussian law")
    igcheck.add_argument("--s", type=float, required=True, help="Drift s > 0")
    igcheck.add_argument("--l", type=float, required=True, help="Level l > 0")
    igcheck.add_argument("--dt", type=float, default=0.01, help="Grid step")
    igcheck.add_argument("--t-max", type=int, default=None, help="Horizon cap in steps")
    igcheck.add_argument("--no-bridge", dest="bridge", action="store_false", default=True, help="Detect crossings at grid points only")
    igcheck.add_argument("--trials", type=int, default=100_000, help="Number of trials")
    igcheck.add_argument("--seed", type=int, required=True, help="Master seed")
    igcheck.add_argument("--threads", type=int, default=None, help="Worker processes (default: all cores)")
    _add_common_flags(igcheck)
    igcheck.set_defaults(handler=cmd_igcheck, stochastic=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.handler

    progress.enabled = args.stochastic and not args.quiet
    progress.start()
    try:
        return handler(args)
    except ValidationError as e:
        for line in describe_validation_error(e):
            error(line)
        return EXIT_VALIDATION
    except (DomainError, ConfigError) as e:
        error(str(e))
        return EXIT_VALIDATION
    except OSError as e:
        # OutputError included
        error(str(e) if isinstance(e, OutputError) else f"{e.filename or ''}: {e.strerror or e}")
        return EXIT_IO
    finally:
        progress.stop()


if __name__ == "__main__":
    sys.exit(main())
