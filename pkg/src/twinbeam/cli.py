"""Command-line entry point.

    twinbeam run <config.toml> [--out DIR] [--format csv|json] [--grid G]
    twinbeam table1 [--out DIR] [--format ...] [--grid G]
    twinbeam fig2   [--out DIR] [--format ...] [--grid G]
    twinbeam oracle-check [--cases N] [--seed S]

Exit codes: 0 success, 1 configuration/validation problem, 2 numerical
failure (including an oracle check out of tolerance).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .crosscheck import run_crosscheck
from .errors import (
    ConfigError,
    NumericalFailureError,
    UndefinedConditionalError,
    UndefinedMomentError,
)
from .runner import bundled_config, load_config, run_scenario


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default, which this tool
    # reserves for numerical failures; bad arguments are validation
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_options(parser):
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output file format"
    )
    parser.add_argument(
        "--grid", type=int, default=None, help="override source.grid_points"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twinbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a scenario config file")
    run.add_argument("config", help="path to a TOML scenario file")
    _add_run_options(run)
    run.set_defaults(func=_cmd_run)

    for name, blurb in (
        ("table1", "bundled filtered mode-number table"),
        ("fig2", "bundled correlation gain sweep"),
    ):
        cmd = sub.add_parser(name, help=blurb)
        _add_run_options(cmd)
        cmd.set_defaults(func=_cmd_bundled, scenario=name)

    oracle = sub.add_parser("oracle-check", help="Gaussian engine vs Fock oracle")
    oracle.add_argument("--cases", type=int, default=20, help="number of random systems")
    oracle.add_argument("--seed", type=int, default=1234, help="RNG seed")
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def _check_grid(grid):
    if grid is not None and grid < 2:
        raise ConfigError("--grid must be at least 2")


def _cmd_run(args) -> int:
    _check_grid(args.grid)
    config = load_config(args.config)
    for path in run_scenario(config, args.out, args.format, args.grid):
        print(f"wrote {path}")
    return 0


def _cmd_bundled(args) -> int:
    _check_grid(args.grid)
    config = bundled_config(args.scenario)
    for path in run_scenario(config, args.out, args.format, args.grid):
        print(f"wrote {path}")
    return 0


def _cmd_oracle(args) -> int:
    if args.cases < 1:
        raise ConfigError("--cases must be at least 1")
    cases = run_crosscheck(n_cases=args.cases, seed=args.seed)
    for c in cases:
        status = "ok" if c.passed else "FAIL"
        print(
            f"case {c.index:02d}  B={c.b:.4f}  eps={c.eps_trunc:.1e}  "
            f"worst {c.worst_rel:.2e} at {c.worst_order}  {status}"
        )
    good = sum(c.passed for c in cases)
    if good == len(cases):
        print(f"oracle check: {good}/{len(cases)} cases within tolerance")
        return 0
    print(f"oracle check FAILED: {len(cases) - good}/{len(cases)} cases out of tolerance")
    return 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"twinbeam: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"twinbeam: {exc}", file=sys.stderr)
        return 1
    except (
        NumericalFailureError,
        UndefinedMomentError,
        UndefinedConditionalError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"twinbeam: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
