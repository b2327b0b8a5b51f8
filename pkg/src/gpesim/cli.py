"""Command line front end.

Subcommands mirror the library drivers: `ground`, `evolve`, `veff` and
`dressed` take a config file, `scenario` runs a bundled configuration by
name, and `sweep` repeats an evolution over a list of parameter values.
Every command writes its delimited outputs, a JSON manifest, the resolved
config and a rendered PNG into the output directory.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import ConfigError, parse_config_file
from .scenarios import (SCENARIO_CONFIGS, run_dressed, run_evolve, run_ground,
                        run_scenario, run_sweep, run_veff)


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="run configuration file")
    parser.add_argument("--out", default=None,
                        help="output directory (default: output.directory)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpe",
        description="Condensate dynamics in shaken, energy-truncated traps.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground", help="solve the starting ground state")
    _add_config_arg(p)

    p = sub.add_parser("evolve", help="propagate the driven condensate")
    _add_config_arg(p)

    p = sub.add_parser("veff", help="tabulate the drive-averaged potential")
    _add_config_arg(p)

    p = sub.add_parser("dressed", help="tabulate the dressed potentials")
    _add_config_arg(p)

    p = sub.add_parser("scenario", help="run a bundled configuration")
    p.add_argument("name", help="one of: " + ", ".join(sorted(SCENARIO_CONFIGS)))
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1,
                   help="parallel processes for sweep scenarios")
    p.add_argument("--three-d", action="store_true",
                   help="run the full 3D variant of fig3 (much slower)")

    p = sub.add_parser("sweep", help="repeat an evolution over parameter values")
    _add_config_arg(p)
    p.add_argument("--param", required=True,
                   help="dotted parameter path, e.g. drive.alpha0")
    p.add_argument("--values", required=True,
                   help="comma-separated values, e.g. 15,20")
    p.add_argument("--workers", type=int, default=1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "scenario":
            name = args.name
            if args.three_d:
                if name != "fig3":
                    raise ConfigError("--three-d applies to the fig3 scenario only")
                name = "fig3_3d"
            result = run_scenario(name, out_dir=args.out,
                                  workers=args.workers)
            print(f"scenario {name}: outputs in {result['out']}")
            return 0

        config = parse_config_file(args.config)
        if args.command == "ground":
            result = run_ground(config, args.out)
            print(json.dumps(result["summary"], indent=2, sort_keys=True))
        elif args.command == "evolve":
            result = run_evolve(config, args.out)
            print(json.dumps(result["summary"], indent=2, sort_keys=True))
        elif args.command == "veff":
            result = run_veff(config, args.out)
            wells = result["wells"]
            if wells.is_double_well:
                print(f"double well: minima at {wells.minima[0]:.6g}, "
                      f"{wells.minima[1]:.6g}, barrier {wells.barrier:.6g}")
            else:
                print("single well")
        elif args.command == "dressed":
            run_dressed(config, args.out)
            print("dressed potentials written")
        elif args.command == "sweep":
            values = [float(tok) for tok in args.values.split(",") if tok.strip()]
            result = run_sweep(config, args.param, values,
                               workers=args.workers, out_dir=args.out)
            for row in result["rows"]:
                print(f"{args.param} = {row['value']:g}: "
                      f"rate {row['rate_per_cycle']:.3g} per cycle "
                      f"[{row['status']}]")
        return 0
    except (ConfigError, OSError, ValueError) as exc:
        print(f"gpe: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
