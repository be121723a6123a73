"""Experiment orchestration: success rates, bisection sizing, inheritance sweeps.

Seeds
-----
Every run seed is derived from a master seed and a tuple of counters with
:func:`derive_seed`, ``SeedSequence(master, spawn_key=counters)``. The
counters are ``(STREAM_BISECTION, repeat, trial)`` for bisection trials and
``(STREAM_MEASURE, run)`` for convergence/evaluation measurements. They do
not include ``n`` or ``p_i``, so all population sizes and inheritance
probabilities are compared on common random numbers.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean, stdev
from typing import Callable, Iterable, Sequence

import numpy as np

from . import theory
from .engine import RunConfig, RunStats, run_ecga
from .problems import ProblemSpec

logger = logging.getLogger(__name__)

STREAM_BISECTION = 0
STREAM_MEASURE = 1

DEFAULT_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)

CSV_COLUMNS = (
    "p_i", "n_min", "n_ratio", "n_ratio_theory", "tc", "tc_ratio", "tc_ratio_theory",
    "nfe", "nfe_ratio", "nfe_ratio_theory", "speedup", "speedup_theory", "sd_n", "sd_tc", "sd_nfe",
)


class BisectionError(RuntimeError):
    """The failure target was not met below the population-size cap."""


def derive_seed(master: int, *counters: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=counters).generate_state(1, np.uint64)[0])


def round_up(n: float, s: int) -> int:
    return max(s, int(math.ceil(n / s)) * s)


def run_many(configs: Sequence[RunConfig], workers: int = 1) -> list[RunStats]:
    """Run configs, in parallel when ``workers > 1``; results keep input order."""
    if workers <= 1 or len(configs) < 2:
        return [run_ecga(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_ecga, configs, chunksize=max(1, len(configs) // (4 * workers))))


def success_rate(cfg: RunConfig, trials: int, master_seed: int | None = None, workers: int = 1) -> float:
    """Fraction of ``trials`` runs converging with at least ``m - 1`` correct blocks.

    Trial ``t`` uses seed ``derive_seed(master_seed, STREAM_BISECTION, 0, t)``
    (``master_seed`` defaults to ``cfg.seed``).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    master = cfg.seed if master_seed is None else master_seed
    configs = [replace(cfg, seed=derive_seed(master, STREAM_BISECTION, 0, t)) for t in range(trials)]
    return fmean(r.success for r in run_many(configs, workers))


def bb_failure_rate(results: Iterable[RunStats]) -> float:
    """Mean fraction of blocks not correctly converged; cap-hit runs count as all failed."""
    results = list(results)
    return fmean(1.0 - (r.correct_bbs if r.converged else 0) / r.m for r in results)


def run_failure_rate(results: Iterable[RunStats]) -> float:
    return fmean(0.0 if r.success else 1.0 for r in results)


FAILURE_MEASURES: dict[str, Callable[[Iterable[RunStats]], float]] = {
    "bb": bb_failure_rate,
    "run": run_failure_rate,
}


def bisect(passes: Callable[[int], bool], n_lo: int, n_hi: int, step: int = 1,
           tolerance: float = 0.05, n_cap: int = 1 << 16) -> int:
    """Smallest multiple of ``step`` for which ``passes`` holds, to a relative tolerance.

    ``n_hi`` is doubled (and ``n_lo`` raised to the old ``n_hi``) until it
    passes; exceeding ``n_cap`` raises :class:`BisectionError`. The interval
    is then halved until its width is at most ``max(step, tolerance * n_hi)``.
    ``passes`` is assumed monotone in ``n``.
    """
    n_lo, n_hi = round_up(n_lo, step), round_up(max(n_hi, n_lo), step)
    while not passes(n_hi):
        n_lo, n_hi = n_hi, round_up(2 * n_hi, step)
        if n_hi > n_cap:
            raise BisectionError(f"failure target not met for any population size up to {n_cap}")
    if n_lo == n_hi or passes(n_lo):
        return n_lo
    while n_hi - n_lo > max(step, tolerance * n_hi):
        mid = round_up((n_lo + n_hi) / 2, step)
        if mid >= n_hi:
            break
        if passes(mid):
            n_hi = mid
        else:
            n_lo = mid
    return n_hi


@dataclass(frozen=True)
class BisectionConfig:
    template: RunConfig
    runs_per_trial: int = 50
    target_failure: float | None = None
    n_lo: int | None = None
    n_hi: int | None = None
    tolerance: float = 0.05
    n_cap: int = 1 << 14
    repeats: int = 30
    criterion: str = "run"

    def __post_init__(self):
        if self.runs_per_trial < 1:
            raise ValueError("runs_per_trial must be >= 1")
        if not 0.0 < self.target < 1.0:
            raise ValueError("target failure must lie in (0, 1)")
        if self.criterion not in FAILURE_MEASURES:
            raise ValueError(f"criterion must be one of {sorted(FAILURE_MEASURES)}")

    @property
    def target(self) -> float:
        return 1.0 / self.template.spec.m if self.target_failure is None else self.target_failure


@dataclass(frozen=True)
class BisectionResult:
    sizes: tuple[int, ...]

    @property
    def mean(self) -> float:
        return fmean(self.sizes)

    @property
    def sd(self) -> float:
        return stdev(self.sizes) if len(self.sizes) > 1 else 0.0


def _initial_bracket(cfg: BisectionConfig) -> tuple[int, int]:
    s = cfg.template.s
    n_hi = cfg.n_hi if cfg.n_hi is not None else 8 * s
    n_lo = cfg.n_lo if cfg.n_lo is not None else s
    return round_up(n_lo, s), round_up(n_hi, s)


def bisect_once(cfg: BisectionConfig, repeat: int, workers: int = 1) -> int:
    """One bisection; trial ``t`` of repeat ``r`` uses counters ``(STREAM_BISECTION, r, t)``."""
    measure = FAILURE_MEASURES[cfg.criterion]
    master = cfg.template.seed
    seeds = [derive_seed(master, STREAM_BISECTION, repeat, t) for t in range(cfg.runs_per_trial)]
    cache: dict[int, bool] = {}

    def passes(n: int) -> bool:
        if n not in cache:
            base = replace(cfg.template, n=n)
            failure = measure(run_many([replace(base, seed=sd) for sd in seeds], workers))
            cache[n] = failure <= cfg.target
            logger.debug("p_i=%g repeat=%d n=%d failure=%.4f", cfg.template.p_i, repeat, n, failure)
        return cache[n]

    n_lo, n_hi = _initial_bracket(cfg)
    return bisect(passes, n_lo, n_hi, cfg.template.s, cfg.tolerance, cfg.n_cap)


def bisect_population_size(cfg: BisectionConfig, workers: int = 1) -> BisectionResult:
    return BisectionResult(tuple(bisect_once(cfg, r, workers) for r in range(cfg.repeats)))


@dataclass(frozen=True)
class Measurement:
    tc: float
    sd_tc: float
    nfe: float
    sd_nfe: float
    excluded: int
    success: float
    tc_bb: float = float("nan")


def measure_runs(template: RunConfig, n: int, runs: int, workers: int = 1) -> Measurement:
    """Mean generations and evaluations over ``runs`` runs at size ``n``.

    Runs stopped by the generation cap are excluded from the means. ``tc_bb``
    averages the generation at which m - 1 blocks first sat fixed at the
    optimum, over the runs that got there.
    """
    configs = [replace(template, n=n, seed=derive_seed(template.seed, STREAM_MEASURE, r)) for r in range(runs)]
    results = run_many(configs, workers)
    done = [r for r in results if r.converged]
    if not done:
        nan = float("nan")
        return Measurement(nan, nan, nan, nan, len(results), 0.0)
    tcs = [r.generations for r in done]
    nfes = [r.evaluations for r in done]
    bbs = [r.bb_generations for r in done if r.bb_generations is not None]
    return Measurement(
        tc=fmean(tcs), sd_tc=stdev(tcs) if len(tcs) > 1 else 0.0,
        nfe=fmean(nfes), sd_nfe=stdev(nfes) if len(nfes) > 1 else 0.0,
        excluded=len(results) - len(done),
        success=fmean(r.success for r in results),
        tc_bb=fmean(bbs) if bbs else float("nan"),
    )


@dataclass
class SweepRow:
    p_i: float
    n_min: float = float("nan")
    sd_n: float = float("nan")
    tc: float = float("nan")
    sd_tc: float = float("nan")
    nfe: float = float("nan")
    sd_nfe: float = float("nan")
    n_ratio: float = float("nan")
    tc_ratio: float = float("nan")
    nfe_ratio: float = float("nan")
    excluded: int = 0
    success: float = float("nan")
    tc_bb: float = float("nan")
    n_sizes: tuple[int, ...] = field(default=(), repr=False)
    error: str | None = None

    @property
    def speedup(self) -> float:
        return 1.0 / self.nfe_ratio if self.nfe_ratio > 0 else float("nan")


def sweep_inheritance(spec: ProblemSpec, s: int, grid: Sequence[float] = DEFAULT_GRID, *, runs_per_trial: int = 50,
                      repeats: int = 10, measure: int = 300, seed: int = 0, tolerance: float = 0.05,
                      criterion: str = "run", max_generations: int | None = None, n_cap: int = 1 << 14,
                      schema_pool: str = "parents", workers: int = 1) -> list[SweepRow]:
    """Bisected size, convergence time and evaluations for each ``p_i`` in ``grid``.

    Ratios are taken against the ``p_i = 0`` row, which must be in the grid.
    A row whose bisection fails carries the error and NaN values; the sweep
    continues with the remaining rows.
    """
    grid = sorted(float(p) for p in grid)
    if 0.0 not in grid:
        raise ValueError("the p_i grid must include 0 (the ratio baseline)")
    rows = []
    bracket: tuple[int, int] | None = None
    for p in grid:
        row = SweepRow(p)
        template = RunConfig(spec, n=s, s=s, p_i=p, max_generations=max_generations, seed=seed, schema_pool=schema_pool)
        lo, hi = bracket if bracket is not None else (None, None)
        bcfg = BisectionConfig(template, runs_per_trial=runs_per_trial, n_lo=lo, n_hi=hi, tolerance=tolerance,
                               n_cap=n_cap, repeats=repeats, criterion=criterion)
        try:
            sizes = bisect_population_size(bcfg, workers)
        except BisectionError as exc:
            row.error = str(exc)
            logger.warning("p_i=%g: %s", p, exc)
            rows.append(row)
            continue
        row.n_sizes = sizes.sizes
        row.n_min, row.sd_n = sizes.mean, sizes.sd
        meas = measure_runs(template, round_up(sizes.mean, s), measure, workers)
        row.tc, row.sd_tc, row.nfe, row.sd_nfe, row.excluded = meas.tc, meas.sd_tc, meas.nfe, meas.sd_nfe, meas.excluded
        row.success, row.tc_bb = meas.success, meas.tc_bb
        if p == 0.0:
            # later rows need at least this size; start them just below it
            bracket = (round_up(0.5 * sizes.mean, s), round_up(sizes.mean, s))
        logger.info("p_i=%g n_min=%.1f tc=%.2f nfe=%.1f", p, row.n_min, row.tc, row.nfe)
        rows.append(row)

    base = rows[grid.index(0.0)]
    for row in rows:
        row.n_ratio = row.n_min / base.n_min
        row.tc_ratio = row.tc / base.tc
        row.nfe_ratio = row.nfe / base.nfe
    return rows


def _fmt(x: float) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6g}"


def emit_csv(rows: Sequence[SweepRow], destination, overlay: dict[float, dict[str, float]] | None = None) -> None:
    """Write sweep rows with model predictions alongside, sorted by ``p_i``.

    ``destination`` is a path or an open text file. ``overlay`` maps ``p_i``
    to any of ``n_ratio``, ``tc_ratio``, ``nfe_ratio`` and ``speedup``;
    missing entries come from :mod:`ecga.theory`.
    """
    if not rows:
        raise ValueError("no rows to write")
    overlay = overlay or {}
    with _open_out(destination) as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in sorted(rows, key=lambda r: r.p_i):
            th = {
                "n_ratio": theory.population_size_ratio(row.p_i),
                "tc_ratio": theory.convergence_time_ratio(row.p_i),
                "nfe_ratio": theory.function_evaluation_ratio(row.p_i),
                "speedup": theory.speedup(row.p_i),
            }
            th.update(overlay.get(row.p_i, {}))
            writer.writerow([_fmt(v) for v in (
                row.p_i, row.n_min, row.n_ratio, th["n_ratio"], row.tc, row.tc_ratio, th["tc_ratio"],
                row.nfe, row.nfe_ratio, th["nfe_ratio"], row.speedup, th["speedup"], row.sd_n, row.sd_tc,
                row.sd_nfe,
            )])


@contextmanager
def _open_out(destination):
    if hasattr(destination, "write"):
        yield destination
    else:
        with Path(destination).open("w", newline="") as fh:
            yield fh


def read_csv(source) -> list[dict[str, float]]:
    with Path(source).open(newline="") as fh:
        return [{k: float(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]
