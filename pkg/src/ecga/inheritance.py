"""Building-block-wise fitness inheritance.

Schema fitnesses are estimated from the evaluated members of the selected
pool: for each group of the current model and each of its configurations,
the mean fitness of the evaluated carriers minus the mean fitness of all
evaluated members. An offspring's inherited fitness is the evaluated mean
plus the schema fitness of its configuration in every group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .genome import Population, Provenance
from .mpm import Partition, PartitionModel, group_counts, partition_codes
from .problems import ProblemSpec, evaluate_many


class NoEvaluatedParents(ValueError):
    """The pool holds no individual with an evaluated fitness."""


@dataclass(frozen=True)
class InheritanceConfig:
    p_i: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_i <= 1.0:
            raise ValueError(f"inheritance probability must lie in [0, 1], got {self.p_i}")


@dataclass(frozen=True, eq=False)
class SchemaFitnessTable:
    groups: Partition
    fitness: tuple[np.ndarray, ...]
    counts: tuple[np.ndarray, ...]
    evaluated_mean: float
    n_evaluated: int

    @property
    def n_schemata(self) -> int:
        return sum(t.size for t in self.fitness)

    def schemata(self, length: int) -> list[str]:
        """Schema strings (``*`` for free loci) in table order."""
        out = []
        for g in self.groups:
            k = len(g)
            for j in range(2 ** k):
                s = ["*"] * length
                for pos, locus in enumerate(g):
                    s[locus] = str((j >> (k - 1 - pos)) & 1)
                out.append("".join(s))
        return out


def estimate_schema_fitness(model: PartitionModel | Partition, parents: Population) -> SchemaFitnessTable:
    """Schema fitness of every configuration of every group of ``model``.

    Only members with :attr:`Provenance.EVALUATED` take part; schemata absent
    from that subset get fitness 0.
    """
    groups = model.groups if isinstance(model, PartitionModel) else tuple(tuple(g) for g in model)
    mask = parents.provenance == Provenance.EVALUATED
    n_eval = int(mask.sum())
    if n_eval == 0:
        raise NoEvaluatedParents("no evaluated parents to estimate schema fitness from")
    bits = parents.bits[mask]
    f = parents.fitness[mask]
    mean = float(f.mean())
    codes = partition_codes(bits, groups)
    counts = group_counts(codes, groups)
    totals = group_counts(codes, groups, weights=f)
    tables = []
    for cnt, total in zip(counts, totals):
        est = np.zeros(cnt.size)
        present = cnt > 0
        est[present] = total[present] / cnt[present] - mean
        est.flags.writeable = False
        cnt.flags.writeable = False
        tables.append(est)
    return SchemaFitnessTable(groups, tuple(tables), tuple(counts), mean, n_eval)


def inherited_fitness_many(table: SchemaFitnessTable, bits: np.ndarray) -> np.ndarray:
    bits = np.atleast_2d(bits)
    codes = partition_codes(bits, table.groups)
    out = np.full(bits.shape[0], table.evaluated_mean)
    for gi, est in enumerate(table.fitness):
        out += est[codes[:, gi]]
    return out


def inherited_fitness(table: SchemaFitnessTable, genotype) -> float:
    g = np.asarray(genotype, dtype=np.uint8)
    if g.size != sum(len(x) for x in table.groups):
        raise ValueError("genotype length does not match the table's model")
    return float(inherited_fitness_many(table, g[None, :])[0])


def assign_fitness(offspring: Population, cfg: InheritanceConfig | float, table: SchemaFitnessTable | None,
                   spec: ProblemSpec, rng: np.random.Generator) -> tuple[Population, int]:
    """Give each offspring an inherited (probability ``p_i``) or evaluated fitness.

    All Bernoulli draws are taken up front in offspring order. No draws are
    made when ``p_i`` is 0 or 1, so a ``p_i = 0`` run consumes exactly the
    random stream of a plain eCGA. Returns the new population and the number
    of objective evaluations spent.
    """
    p_i = cfg.p_i if isinstance(cfg, InheritanceConfig) else InheritanceConfig(float(cfg)).p_i
    if np.any(offspring.provenance != Provenance.UNSET):
        raise ValueError("offspring must not carry a fitness yet")
    n = offspring.size
    if p_i == 0.0:
        inherit = np.zeros(n, dtype=bool)
    elif p_i == 1.0:
        inherit = np.ones(n, dtype=bool)
    else:
        inherit = rng.random(n) < p_i
    if inherit.any() and table is None:
        raise ValueError("a schema fitness table is required when p_i > 0")

    fitness = np.empty(n)
    provenance = np.where(inherit, Provenance.INHERITED, Provenance.EVALUATED).astype(np.int8)
    evaluate = ~inherit
    n_evals = int(evaluate.sum())
    if n_evals:
        fitness[evaluate] = evaluate_many(spec, offspring.bits[evaluate])
    if n_evals < n:
        fitness[inherit] = inherited_fitness_many(table, offspring.bits[inherit])
    return offspring.with_fitness(fitness, provenance), n_evals
