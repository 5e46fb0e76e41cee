"""Command-line interface.

Subcommands:

* ``sweep``     rate versus distance for the configured source
* ``compare``   the four standard sources on one grid
* ``optimize``  best intensity pair per distance
* ``yields``    single-photon and vacuum yield diagnostics at one distance

Results are written as CSV (or key=value lines for ``yields``) to
``--out`` or stdout.  Exit codes: 0 on success, 2 for configuration
problems, 3 when a computation leaves the supported domain.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import List, Optional

from .bsm import BellOutcome, bell_yield, propagate, Polarization
from .config import Scenario, load_scenario
from .errors import ConfigError, CutoffError, DomainError
from .rates import true_single_photon_quantities
from .sweep import (
    _cached_tables,
    compare_sources,
    optimize_intensities,
    run_sweep,
    write_csv,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdiqkd",
        description="Key rates for measurement-device-independent QKD "
        "with superposition, coherent and single-photon sources.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", metavar="PATH", help="key=value config file")
        sub.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        sub.add_argument(
            "--method",
            choices=["asymptotic", "standard", "chernoff"],
            help="override the statistical treatment of observed gains",
        )
        sub.add_argument(
            "--pulses",
            type=float,
            metavar="N",
            help="override the number of transmitted pulse pairs",
        )
        sub.add_argument(
            "--workers",
            type=int,
            default=1,
            metavar="K",
            help="parallel worker processes (results are order-stable)",
        )

    add_common(commands.add_parser("sweep", help="rate versus distance"))
    add_common(commands.add_parser("compare", help="all four standard sources"))
    add_common(commands.add_parser("optimize", help="best intensities per distance"))
    yields = commands.add_parser("yields", help="yield diagnostics at one distance")
    add_common(yields)
    yields.add_argument(
        "--distance-km", type=float, default=0.0, help="total link length"
    )
    return parser


def _load(args: argparse.Namespace) -> Scenario:
    text = None
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from None
    return load_scenario(text, method=args.method, pulse_pairs=args.pulses)


def _write_lines(lines: List[str], out: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii", newline="") as handle:
            handle.write(text)


def _yields_report(scenario: Scenario, distance_km: float) -> List[str]:
    system = replace(scenario.system, distance_km=distance_km)
    table = _cached_tables(system.detector_params(), scenario.cutoff)
    truth = true_single_photon_quantities(table, system.misalignment)
    vacuum = propagate(0, Polarization.H, 0, Polarization.V)
    vacuum_yield = bell_yield(vacuum, BellOutcome.PSI_PLUS, system.detector_params())

    def fmt(value: Optional[float]) -> str:
        return format(float("nan") if value is None else value, ".17g")

    return [
        f"distance_km = {fmt(distance_km)}",
        f"overall_efficiency = {fmt(system.overall_efficiency())}",
        f"dark_count = {fmt(system.dark_count)}",
        f"cutoff = {scenario.cutoff}",
        f"y11_z = {fmt(truth.y11_z)}",
        f"e11_z = {fmt(truth.e11_z)}",
        f"y11_x = {fmt(truth.y11_x)}",
        f"e11_x = {fmt(truth.e11_x)}",
        f"vacuum_yield = {fmt(vacuum_yield)}",
    ]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        scenario = _load(args)
        if args.command == "sweep":
            points = run_sweep(scenario, workers=args.workers)
        elif args.command == "compare":
            points = compare_sources(scenario, workers=args.workers)
        elif args.command == "optimize":
            points = optimize_intensities(scenario, workers=args.workers)
        else:
            _write_lines(_yields_report(scenario, args.distance_km), args.out)
            return 0
        if args.out is None:
            write_csv(points, sys.stdout)
        else:
            write_csv(points, args.out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CutoffError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
