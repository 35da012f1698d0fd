"""Command-line experiment runner.

Runs either a preset sweep (``--preset fig2``) or a custom one
(``--sweep num_users --values 2,4,6``), writes a detail CSV, a summary CSV
and three PNG figures per experiment into the output directory.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import bench, plots
from .scenario import ScenarioConfig, load_config


def _parse_values(raw: str, sweep_variable: str) -> tuple:
    values = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        values.append(int(part) if sweep_variable == "num_users" else float(part))
    if not values:
        raise ValueError("--values must list at least one number")
    return tuple(values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mecsched",
        description="Monte Carlo sweeps of OFDMA offloading schedulers",
    )
    parser.add_argument("--config", metavar="PATH",
                        help="base scenario config file (flat key = value)")
    parser.add_argument("--preset", choices=bench.PRESET_NAMES,
                        help="ready-made experiment sweep")
    parser.add_argument("--sweep", choices=bench.SWEEP_VARIABLES,
                        help="sweep variable for a custom experiment")
    parser.add_argument("--values", metavar="LIST",
                        help="comma-separated sweep values")
    parser.add_argument("--policies", metavar="LIST",
                        default="local_only,min_group,per_resource,joint",
                        help=f"comma-separated subset of {','.join(bench.POLICIES)}")
    parser.add_argument("--trials", type=int, default=200,
                        help="Monte Carlo trials per sweep point (default 200)")
    parser.add_argument("--seed", type=int, default=1234,
                        help="master seed for scenario generation")
    parser.add_argument("--out", metavar="DIR", default="results",
                        help="output directory (default ./results)")
    parser.add_argument("--max-exhaustive-users", type=int, default=4,
                        help="largest user count allowed for exhaustive baselines")
    parser.add_argument("--max-exhaustive-subcarriers", type=int, default=4,
                        help="largest subcarrier count allowed for exhaustive baselines")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering, emit CSVs only")
    parser.add_argument("--no-timing", action="store_true",
                        help="write 0.0 wall times for byte-reproducible CSVs")
    return parser


def _experiments(args) -> list:
    if args.preset and args.sweep:
        raise ValueError("--preset and --sweep are mutually exclusive")
    if args.preset:
        specs = bench.preset_experiments(args.preset, trials=args.trials,
                                         master_seed=args.seed)
        if args.config:
            base = load_config(args.config)
            specs = [replace(s, base_config=base) for s in specs]
        return [replace(s,
                        max_exhaustive_users=args.max_exhaustive_users,
                        max_exhaustive_subcarriers=args.max_exhaustive_subcarriers)
                for s in specs]
    if not args.sweep:
        raise ValueError("need either --preset or --sweep/--values")
    if not args.values:
        raise ValueError("--sweep requires --values")
    base = load_config(args.config) if args.config else ScenarioConfig()
    policies = tuple(p.strip() for p in args.policies.split(",") if p.strip())
    return [bench.ExperimentSpec(
        name=f"sweep_{args.sweep}",
        base_config=base,
        sweep_variable=args.sweep,
        sweep_values=_parse_values(args.values, args.sweep),
        policies=policies,
        trials=args.trials,
        master_seed=args.seed,
        max_exhaustive_users=args.max_exhaustive_users,
        max_exhaustive_subcarriers=args.max_exhaustive_subcarriers,
    )]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        specs = _experiments(args)
        for spec in specs:
            spec.validate()
    except ValueError as err:
        print(f"mecsched: {err}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        rows = bench.run_experiment(spec, measure_time=not args.no_timing)
        detail, summary_path = bench.emit_results(rows, out_dir / f"{spec.name}.csv")
        print(f"{spec.name}: {len(rows)} rows -> {detail}")
        print(f"{spec.name}: summary -> {summary_path}")
        if not args.no_figures:
            figures = plots.render_figures(bench.summarize(rows),
                                           spec.sweep_variable,
                                           out_dir / spec.name)
            for path in figures:
                print(f"{spec.name}: figure -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
