"""Command line interface: ``ecga {run,bisect,sweep,theory}``.

Every option can also come from a config file given with ``--config``:
flat ``key = value`` lines using the long option names (``pi-grid``,
``paper-scale`` ...). Command line flags override the file.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
from dataclasses import asdict

from . import theory
from .engine import RunConfig, run_ecga
from .harness import (DEFAULT_GRID, BisectionConfig, BisectionError, bisect_population_size, emit_csv,
                      round_up, sweep_inheritance)
from .problems import ProblemSpec, onemax, trap

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file with defaults for any option")
    p.add_argument("--problem", choices=["onemax", "trap"], default="trap")
    p.add_argument("--len", type=int, help="OneMax string length (default 50, 100 with --paper-scale)")
    p.add_argument("--m", type=int, help="number of trap blocks (default 5, 10 with --paper-scale)")
    p.add_argument("--k", type=int, default=4, help="trap block size")
    p.add_argument("--permute", type=int, metavar="SEED", help="scatter trap loci with a seeded permutation")
    p.add_argument("--s", type=int, help="tournament size (default 4 for OneMax, 8 for trap)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paper-scale", action="store_true", help="100-bit OneMax / 10x4-trap and 30 repeats")
    p.add_argument("--max-gen", type=int, help="generation cap (default 10 * length)")
    p.add_argument("--schema-pool", choices=["parents", "selected"], default="parents",
                   help="population whose evaluated members estimate schema fitness")
    p.add_argument("--verbose", "-v", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="one eCGA run, prints its statistics")
    _common(run)
    run.add_argument("--n", type=int, default=200, help="population size (rounded up to a multiple of s)")
    run.add_argument("--pi", type=float, default=0.0)

    bis = sub.add_parser("bisect", help="bisection search for the minimal population size")
    _common(bis)
    bis.add_argument("--pi", type=float, default=0.0)
    bis.add_argument("--trials", type=int, default=50, help="runs per bisection trial")
    bis.add_argument("--repeats", type=int, help="independent bisections (default 10, 30 with --paper-scale)")
    bis.add_argument("--tolerance", type=float, default=0.05)
    bis.add_argument("--criterion", choices=["run", "bb"], default="run")
    bis.add_argument("--n-cap", type=int, default=1 << 14, help="give up above this population size")

    sw = sub.add_parser("sweep", help="sizing/time/evaluation ratios over a p_i grid, as CSV")
    _common(sw)
    sw.add_argument("--pi-grid", type=_grid, default=list(DEFAULT_GRID))
    sw.add_argument("--trials", type=int, default=50, help="runs per bisection trial")
    sw.add_argument("--repeats", type=int, help="independent bisections (default 10, 30 with --paper-scale)")
    sw.add_argument("--measure", type=int, default=300, help="runs per convergence/evaluation measurement")
    sw.add_argument("--tolerance", type=float, default=0.05)
    sw.add_argument("--criterion", choices=["run", "bb"], default="run")
    sw.add_argument("--n-cap", type=int, default=1 << 14, help="give up above this population size")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", default="-", help="CSV destination (default stdout)")

    th = sub.add_parser("theory", help="model predictions over a p_i grid, as CSV")
    th.add_argument("--config")
    th.add_argument("--pi-grid", type=_grid, default=list(DEFAULT_GRID))
    th.add_argument("--tc0", type=float, help="no-inheritance convergence time for the exact evaluation ratio")
    th.add_argument("--out", default="-")
    th.add_argument("--verbose", "-v", action="count", default=0)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cp = configparser.ConfigParser()
    try:
        with open(args.config) as fh:
            cp.read_string("[ecga]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    file_args = []
    for key, value in cp["ecga"].items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            file_args.append(flag)
        elif value.lower() not in ("false", "no", "off"):
            file_args += [flag, value]
    # file values first so explicit flags win
    return parser.parse_args([argv[0], *file_args, *argv[1:]])


def _problem(args) -> tuple[ProblemSpec, int]:
    if args.problem == "onemax":
        spec = onemax(args.len or (100 if args.paper_scale else 50))
    else:
        spec = trap(args.m or (10 if args.paper_scale else 5), args.k, permute_seed=args.permute)
    s = args.s or (4 if args.problem == "onemax" else 8)
    return spec, s


def _write_rows(rows: list[dict], out) -> None:
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: f"{v:.6g}" if isinstance(v, float) else v for k, v in r.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"ecga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr)

    if args.command == "theory":
        _write_rows(theory.theory_table(args.pi_grid, args.tc0), args.out)
        return EXIT_OK

    try:
        spec, s = _problem(args)
        repeats = getattr(args, "repeats", None) or (30 if args.paper_scale else 10)
        if args.command == "run":
            cfg = RunConfig(spec, round_up(args.n, s), s, args.pi, args.max_gen, args.seed, args.schema_pool)
            stats = run_ecga(cfg)
            fields = {k: v for k, v in asdict(stats).items() if not isinstance(v, tuple)}
            print(" ".join(f"{k}={v}" for k, v in {**fields, "success": stats.success}.items()))
            return EXIT_OK
        if args.command == "bisect":
            template = RunConfig(spec, s, s, args.pi, args.max_gen, args.seed, args.schema_pool)
            result = bisect_population_size(
                BisectionConfig(template, args.trials, tolerance=args.tolerance, n_cap=args.n_cap,
                                repeats=repeats, criterion=args.criterion))
            print(f"n_min={result.mean:.6g} sd={result.sd:.6g} sizes={','.join(map(str, result.sizes))}")
            return EXIT_OK
        rows = sweep_inheritance(spec, s, args.pi_grid, runs_per_trial=args.trials, repeats=repeats,
                                 measure=args.measure, seed=args.seed, tolerance=args.tolerance,
                                 criterion=args.criterion, max_generations=args.max_gen, n_cap=args.n_cap,
                                 schema_pool=args.schema_pool, workers=args.workers)
    except BisectionError as exc:
        print(f"ecga: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"ecga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    emit_csv(rows, sys.stdout if args.out == "-" else args.out)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"ecga: p_i={r.p_i:g}: {r.error}", file=sys.stderr)
    return EXIT_FAILURE if failed else EXIT_OK
