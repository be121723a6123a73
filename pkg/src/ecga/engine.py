"""Generational eCGA with building-block-wise fitness inheritance."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .genome import Population, Provenance, all_same_fitness, random_population
from .inheritance import (InheritanceConfig, NoEvaluatedParents, SchemaFitnessTable, assign_fitness,
                          estimate_schema_fitness)
from .mpm import config_codes, greedy_model_search, sample_offspring
from .problems import ProblemSpec, block_ones, evaluate_many
from .selection import SelectionConfig, tournament_select

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    spec: ProblemSpec
    n: int
    s: int = 4
    p_i: float = 0.0
    max_generations: int | None = None
    seed: int = 0
    schema_pool: str = "parents"

    def __post_init__(self):
        SelectionConfig(self.s)
        InheritanceConfig(self.p_i)
        if self.schema_pool not in ("selected", "parents"):
            raise ValueError("schema_pool must be 'selected' or 'parents'")
        if self.n < self.s or self.n % self.s:
            raise ValueError(f"population size {self.n} must be a positive multiple of s = {self.s}")

    @property
    def generation_cap(self) -> int:
        return 10 * self.spec.length if self.max_generations is None else self.max_generations


@dataclass(frozen=True)
class RunStats:
    generations: int
    evaluations: int
    correct_bbs: int
    m: int
    converged: bool
    evaluations_per_generation: tuple[int, ...] = field(default=(), repr=False)
    evaluated_parents: tuple[int, ...] = field(default=(), repr=False)
    bb_generations: int | None = None

    @property
    def success(self) -> bool:
        return self.converged and self.correct_bbs >= self.m - 1


def bb_convergence_count(pop: Population, spec: ProblemSpec) -> int:
    """Blocks on which the optimal pattern is the strict modal configuration.

    A tie between the optimal pattern and another configuration counts as
    not converged.
    """
    optimal = 2 ** spec.k - 1
    correct = 0
    for block in spec.true_partition:
        counts = np.bincount(config_codes(pop.bits, block), minlength=2 ** spec.k)
        best_other = np.delete(counts, optimal).max()
        correct += int(counts[optimal] > best_other)
    return correct


def fixed_optimal_blocks(pop: Population, spec: ProblemSpec) -> int:
    """Blocks on which every member carries the optimal pattern."""
    return int(np.all(block_ones(spec, pop.bits) == spec.k, axis=0).sum())


def initial_population(cfg: RunConfig, rng: np.random.Generator) -> Population:
    pop = random_population(cfg.n, cfg.spec.length, rng)
    return pop.with_fitness(evaluate_many(cfg.spec, pop.bits), np.full(cfg.n, Provenance.EVALUATED, dtype=np.int8))


def run_ecga(cfg: RunConfig, *, inheritance: bool = True, observer: Callable[..., None] | None = None) -> RunStats:
    """Run one eCGA to convergence (all fitnesses equal) or the generation cap.

    With ``inheritance=False`` no schema table is built and every offspring
    is evaluated, whatever ``cfg.p_i`` says. ``observer``, if given, is called
    once per generation with keyword arguments ``generation``, ``parents``,
    ``pool``, ``model``, ``table`` and ``offspring``.
    """
    rng = np.random.default_rng(cfg.seed)
    spec = cfg.spec
    p_i = cfg.p_i if inheritance else 0.0
    pop = initial_population(cfg, rng)
    evaluations = cfg.n
    per_gen: list[int] = []
    n_eval_parents: list[int] = []
    first_table: SchemaFitnessTable | None = None
    generations = 0
    bb_generations = 0 if fixed_optimal_blocks(pop, spec) >= spec.m - 1 else None
    cap = cfg.generation_cap

    while not all_same_fitness(pop) and generations < cap:
        pool = tournament_select(pop, cfg.s, rng)
        model = greedy_model_search(pool)
        table = None
        estimation_pool = pool if cfg.schema_pool == "selected" else pop
        if p_i > 0:
            try:
                table = estimate_schema_fitness(model, estimation_pool)
            except NoEvaluatedParents:
                table = first_table
            if first_table is None:
                first_table = table
        n_eval_parents.append(int(np.count_nonzero(estimation_pool.provenance == Provenance.EVALUATED)))
        offspring = sample_offspring(model, cfg.n, rng)
        parents = pop
        pop, used = assign_fitness(offspring, p_i, table, spec, rng)
        evaluations += used
        per_gen.append(used)
        generations += 1
        if observer is not None:
            observer(generation=generations, parents=parents, pool=pool, model=model, table=table, offspring=pop)
        if bb_generations is None and fixed_optimal_blocks(pop, spec) >= spec.m - 1:
            bb_generations = generations
        if logger.isEnabledFor(logging.INFO):
            logger.info("gen %d n_eval=%d best=%.6g mean=%.6g groups=%s", generations, n_eval_parents[-1],
                        pop.fitness.max(), pop.fitness.mean(), model.group_sizes)
            if table is not None:
                logger.info("gen %d schema table: n'=%d mean=%.6g", generations, table.n_evaluated,
                            table.evaluated_mean)
            logger.debug("gen %d model:\n%s", generations, model.format())

    return RunStats(
        generations=generations,
        evaluations=evaluations,
        correct_bbs=bb_convergence_count(pop, spec),
        m=spec.m,
        converged=all_same_fitness(pop),
        evaluations_per_generation=tuple(per_gen),
        evaluated_parents=tuple(n_eval_parents),
        bb_generations=bb_generations,
    )
