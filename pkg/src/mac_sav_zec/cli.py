"""Command-line entry point: ``mac-sav-zec {run,convergence-time,convergence-space,check}``."""

from __future__ import annotations

import argparse
import functools
import sys
from pathlib import Path

from . import studies
from .config import ConfigError, RunConfig, load_config
from .invariants import format_table, run_battery
from .runner import run
from .scheme import STARTUPS, SchemeInvariantError, default_initial_phase, random_initial_phase


def _study_init(config: RunConfig):
    if config.init_case == "default_smooth":
        return default_initial_phase
    if config.init_case == "random":
        return functools.partial(random_initial_phase, seed=config.seed)
    raise ConfigError(f"refinement studies need analytic initial data, not {config.init_case!r}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 2:
        raise argparse.ArgumentTypeError("grid sizes must be integers >= 2")
    return values


def _cmd_run(args) -> int:
    result = run(load_config(args.config))
    for v in result.violations:
        print(f"violation: step {v.step} {v.kind} value={v.value:.3e} tol={v.tolerance:.1e}",
              file=sys.stderr)
    print(f"{result.final_state.step} steps, t = {result.final_state.time:.6g}, "
          f"output in {result.output_dir}")
    return result.exit_status


def _cmd_study(args) -> int:
    config = load_config(args.config)
    study = studies.convergence_time if args.command == "convergence-time" else studies.convergence_space
    try:
        reports = study(config.params, args.levels, startup=args.startup,
                        reference=args.reference, init=_study_init(config))
    except SchemeInvariantError as exc:
        print(f"constituent run failed: {exc}", file=sys.stderr)
        return 1
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for var, rep in reports.items():
        rep.write_csv(out / f"rates_{var}.csv")
        orders = ", ".join(f"{o:.3f}" for o in rep.observed_orders)
        print(f"{var}: observed orders [{orders}]")
    return 0


def _cmd_check(args) -> int:
    results = run_battery(args.n, args.seed)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mac-sav-zec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("config", type=Path)
    p.set_defaults(func=_cmd_run)

    for name in ("convergence-time", "convergence-space"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} refinement study")
        p.add_argument("config", type=Path)
        p.add_argument("--levels", type=int, default=3,
                       help="number of refinements; levels + 1 runs (default 3)")
        p.add_argument("--startup", choices=STARTUPS, default="first_order_step")
        p.add_argument("--reference", choices=studies.REFERENCES, default="successive")
        p.set_defaults(func=_cmd_study)

    p = sub.add_parser("check", help="run the invariant battery")
    p.add_argument("--n", type=_int_list, default=[8, 16, 32], help="grid sizes, e.g. 8,16,32")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
