"""Command-line front end.

Subcommands: solve, sweep, bands, simulate, table2, fig2.  Exit codes:
0 success, 1 validation or parse error, 2 numerical failure.  Machine
output (CSV or the structured-text twin) goes to --output when given,
otherwise to standard output with the human summary moved to stderr so
pipes stay clean.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import analysis, dynamics, harness
from .equilibrium import ConvergenceError, solve
from .harness import ConfigError
from .model import Preferences

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class _ArgumentError(Exception):
    """Raised instead of argparse's SystemExit so main controls the code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def _add_scenario_args(sub):
    sub.add_argument(
        "--scenario",
        default="table1.cfg",
        help="scenario file path or bundled preset name (default table1.cfg)",
    )
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="override a scenario value, e.g. toll.price=150 "
        f"(paths: {', '.join(harness.OVERRIDE_PATHS)})",
    )


def _add_output_args(sub):
    sub.add_argument("--output", help="write machine output to this file")
    sub.add_argument(
        "--format",
        choices=("csv", "structured-text"),
        default="csv",
        help="machine output format (default csv)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="erstoll", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("solve", help="equilibrium of one scenario")
    _add_scenario_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser("sweep", help="solve a grid of scenario overrides")
    _add_scenario_args(p)
    _add_output_args(p)
    p.add_argument(
        "--axis",
        action="append",
        default=[],
        required=False,
        metavar="PATH=VALUES",
        help="sweep axis: PATH=v1,v2,... or PATH=start:stop:count "
        "(repeatable; later axes vary fastest)",
    )
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("bands", help="toll-price bands by resulting pattern")
    _add_scenario_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_bands)

    p = subs.add_parser(
        "simulate", help="day-to-day best-response dynamics over agents"
    )
    _add_scenario_args(p)
    _add_output_args(p)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument(
        "--initial",
        choices=("all_link2", "all_link1", "random", "balanced"),
        default="all_link2",
        help="starting assignment (default all_link2)",
    )
    p.add_argument(
        "--order",
        choices=dynamics.ORDER_POLICIES,
        default="sequential",
        help="agent update order per round (default sequential)",
    )
    p.add_argument(
        "--rounds", type=int, default=10_000, help="round limit (default 10000)"
    )
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser(
        "table2", help="five-scenario toll/charging-value comparison"
    )
    _add_output_args(p)
    p.set_defaults(func=cmd_table2)

    p = subs.add_parser(
        "fig2", help="threshold-SoC surface over toll price and charging value"
    )
    _add_output_args(p)
    p.add_argument("--vot", type=float, default=50.0, help="value of time (JPY/min)")
    p.add_argument(
        "--prices",
        default="0:500:51",
        metavar="VALUES",
        help="toll prices: v1,v2,... or start:stop:count (default 0:500:51)",
    )
    p.add_argument(
        "--voes",
        default="10:300:30",
        metavar="VALUES",
        help="charging values: same syntax (default 10:300:30)",
    )
    p.set_defaults(func=cmd_fig2)
    return parser


def _parse_values(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"range {text!r} must be start:stop:count (got {len(parts)} parts)"
            )
        try:
            start, stop = float(parts[0]), float(parts[1])
            count = int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"range {text!r}: {exc}") from exc
        if count < 1:
            raise ConfigError(f"range {text!r}: count must be >= 1")
        return [float(v) for v in np.linspace(start, stop, count)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"values {text!r}: {exc}") from exc


def _load_scenario(args):
    scenario = harness.resolve_scenario(args.scenario)
    overrides = dict(harness.parse_override_arg(a) for a in args.overrides)
    return harness.apply_overrides(scenario, overrides)


def _emit(args, write_machine, summary_lines: list[str]) -> None:
    """Route machine output and summary per the module docstring."""
    if args.output:
        with open(args.output, "w", newline="") as stream:
            write_machine(stream)
        for line in summary_lines:
            print(line)
        print(f"wrote {args.output}")
    else:
        for line in summary_lines:
            print(line, file=sys.stderr)
        write_machine(sys.stdout)


def _machine_writer(args, rows):
    if args.format == "csv":
        return lambda stream: harness.rows_to_csv(rows, stream)
    return lambda stream: harness.rows_to_yaml(rows, stream)


def cmd_solve(args) -> int:
    scenario = _load_scenario(args)
    result, regime = solve(scenario)
    label = analysis.classify(scenario, result)
    m = analysis.metrics(scenario, result)
    lines = [
        f"pattern          {label.value}",
        f"regime           {regime.value}",
        f"s_thres          {result.s_thres:.4f}",
        f"x1_d             {result.x1_d:.4f}",
        f"x2_d             {result.x2_d:.4f}",
        f"x1_o             {result.x1_o:.4f}",
        f"x2_o             {result.x2_o:.4f}",
        f"x1               {result.x1:.4f}",
        f"x2               {result.x2:.4f}",
        f"t1               {result.t1:.4f} min",
        f"t2               {result.t2:.4f} min",
        f"ttt              {m.ttt:.4f} veh-min",
        f"tcv              {m.tcv:.4f} kWh",
        f"revenue          {m.revenue:.4f} JPY",
        f"conventional_so  {'true' if m.conventional_so else 'false'}",
        f"ers_optimum      {'true' if m.ers_optimum else 'false'}",
    ]
    if args.output:
        rows = [harness.solve_row(scenario)]
        _emit(args, _machine_writer(args, rows), lines)
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.axis:
        raise ConfigError("sweep needs at least one --axis PATH=VALUES")
    scenario = _load_scenario(args)
    axes = []
    for spec_text in args.axis:
        if "=" not in spec_text:
            raise ConfigError(f"axis {spec_text!r} is not of the form PATH=VALUES")
        path, values_text = spec_text.split("=", 1)
        axes.append((path.strip(), tuple(_parse_values(values_text))))
    try:
        spec = harness.SweepSpec(base=scenario, axes=tuple(axes))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = harness.run_sweep(spec)
    failed = sum(1 for r in rows if r.error)
    summary = [f"sweep: {len(rows)} cells, {failed} failed"]
    _emit(args, _machine_writer(args, rows), summary)
    return EXIT_OK


def cmd_bands(args) -> int:
    scenario = _load_scenario(args)
    try:
        bands = analysis.toll_bands(scenario)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    summary = [
        f"{band.pattern.value:<8} [{band.c_low:.4f}, "
        + (f"{band.c_high:.4f})" if math.isfinite(band.c_high) else "inf)")
        for band in bands
    ]

    def write_machine(stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["pattern", "c_low", "c_high"])
        for band in bands:
            hi = f"{band.c_high:.4f}" if math.isfinite(band.c_high) else "inf"
            writer.writerow([band.pattern.value, f"{band.c_low:.4f}", hi])

    _emit(args, write_machine, summary)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = dynamics.discretize_scenario(_load_scenario(args))
    agents = dynamics.agents_from_scenario(
        scenario, initial=args.initial, seed=args.seed
    )
    traj = dynamics.run(
        agents,
        scenario.network,
        scenario.prefs,
        scenario.toll,
        max_rounds=args.rounds,
        order_policy=args.order,
        seed=args.seed,
    )
    result, _ = solve(scenario)
    last = traj.snapshots[-1]
    summary = [
        f"converged        {'true' if traj.converged else 'false'}",
        f"rounds           {traj.terminal_round}",
        f"switches         {traj.total_switches}",
        f"final x1_d       {last.x1_d} (solver {result.x1_d:.4f})",
        f"final x1_o       {last.x1_o} (solver {result.x1_o:.4f})",
    ]
    _emit(args, lambda stream: harness.trajectory_to_csv(traj, stream), summary)
    return EXIT_OK


def cmd_table2(args) -> int:
    rows = harness.table2_rows()
    summary = ["five-scenario comparison (base toll 100 JPY, voe 100 JPY)"]
    _emit(args, _machine_writer(args, rows), summary)
    return EXIT_OK


def cmd_fig2(args) -> int:
    prefs = Preferences(vot=args.vot, voe=100.0)
    grid = harness.fig2_data(
        prefs, _parse_values(args.prices), _parse_values(args.voes)
    )
    summary = [f"threshold surface: {len(grid)} grid points"]
    _emit(args, lambda stream: harness.fig2_to_csv(grid, stream), summary)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and friends
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
