"""Tournament selection without replacement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .genome import Population


@dataclass(frozen=True)
class SelectionConfig:
    s: int = 2

    def __post_init__(self):
        if self.s < 2:
            raise ValueError(f"tournament size must be >= 2, got {self.s}")


def tournament_select(pop: Population, cfg: SelectionConfig | int, rng: np.random.Generator) -> Population:
    """Select ``n`` winners with ``s`` shuffle-and-partition passes.

    Each pass shuffles the population, cuts it into ``n / s`` disjoint
    tournaments and keeps the fittest member of each, so every individual
    plays exactly ``s`` tournaments. Requires ``s`` to divide ``n``.
    """
    s = cfg.s if isinstance(cfg, SelectionConfig) else SelectionConfig(int(cfg)).s
    pop.require_assigned()
    n = pop.size
    if n % s:
        raise ValueError(f"tournament size {s} does not divide population size {n}")
    winners = np.empty(n, dtype=np.intp)
    rows = np.arange(n // s)
    for p in range(s):
        groups = rng.permutation(n).reshape(-1, s)
        # argmax takes the first maximum; the shuffle makes that a uniform pick among ties
        best = np.argmax(pop.fitness[groups], axis=1)
        winners[p * (n // s):(p + 1) * (n // s)] = groups[rows, best]
    return pop.take(winners)
