"""Benchmark objectives with known building-block structure.

Both problems are additively separable over ``m`` blocks of ``k`` loci:

* OneMax: ``k = 1``; each bit contributes its value.
* Trap: each block contributes ``k`` when all ``k`` bits are one and
  ``k - 1 - u`` otherwise, ``u`` being the number of ones in the block.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .genome import Population, as_genotype


class ProblemKind(str, enum.Enum):
    ONEMAX = "onemax"
    TRAP = "trap"


@dataclass(frozen=True)
class ProblemSpec:
    kind: ProblemKind
    m: int
    k: int
    true_partition: tuple[tuple[int, ...], ...]
    optimal_pattern: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be positive")
        if self.kind is ProblemKind.ONEMAX and self.k != 1:
            raise ValueError("OneMax has k = 1")
        if len(self.true_partition) != self.m or any(len(b) != self.k for b in self.true_partition):
            raise ValueError("true_partition must hold m blocks of k loci")
        loci = sorted(i for b in self.true_partition for i in b)
        if loci != list(range(self.length)):
            raise ValueError("true_partition must cover 0..length-1 exactly once")
        object.__setattr__(self, "optimal_pattern", (1,) * self.k)

    @property
    def length(self) -> int:
        return self.m * self.k

    @property
    def optimum_fitness(self) -> float:
        return float(self.m * self.k)

    @property
    def locus_order(self) -> np.ndarray:
        """Loci listed block by block (block i occupies ``[i*k, (i+1)*k)``)."""
        return np.fromiter((i for b in self.true_partition for i in b), dtype=np.intp)

    def describe(self) -> str:
        if self.kind is ProblemKind.ONEMAX:
            return f"{self.length}-bit OneMax"
        return f"{self.m}x{self.k}-trap"


def onemax(length: int) -> ProblemSpec:
    return ProblemSpec(ProblemKind.ONEMAX, length, 1, tuple((i,) for i in range(length)))


def trap(m: int, k: int, permute_seed: int | None = None) -> ProblemSpec:
    """``m`` concatenated ``k``-bit traps.

    With ``permute_seed`` the loci of each block are scattered by a seeded
    random permutation instead of being contiguous.
    """
    loci = np.arange(m * k)
    if permute_seed is not None:
        loci = np.random.default_rng(permute_seed).permutation(loci)
    blocks = tuple(tuple(sorted(int(i) for i in loci[b * k:(b + 1) * k])) for b in range(m))
    return ProblemSpec(ProblemKind.TRAP, m, k, blocks)


def block_ones(spec: ProblemSpec, bits: np.ndarray) -> np.ndarray:
    """Number of ones per block, shape ``(n, m)``."""
    bits = np.atleast_2d(bits)
    if bits.shape[1] != spec.length:
        raise ValueError(f"expected strings of length {spec.length}, got {bits.shape[1]}")
    return bits[:, spec.locus_order].reshape(bits.shape[0], spec.m, spec.k).sum(axis=2, dtype=np.int64)


def trap_value(u, k: int):
    u = np.asarray(u)
    return np.where(u == k, k, k - 1 - u)


def block_values(spec: ProblemSpec, bits: np.ndarray) -> np.ndarray:
    u = block_ones(spec, bits)
    if spec.kind is ProblemKind.ONEMAX:
        return u
    return trap_value(u, spec.k)


def evaluate_many(spec: ProblemSpec, bits: np.ndarray) -> np.ndarray:
    """Fitness of each row of ``bits``."""
    return block_values(spec, bits).sum(axis=1).astype(np.float64)


def evaluate(spec: ProblemSpec, genotype) -> float:
    g = as_genotype(genotype)
    if g.size != spec.length:
        raise ValueError(f"expected a string of length {spec.length}, got {g.size}")
    return float(evaluate_many(spec, g[None, :])[0])


def block_is_optimal(spec: ProblemSpec, genotype, block_index: int) -> bool:
    if not 0 <= block_index < spec.m:
        raise IndexError(f"block index {block_index} out of range for m={spec.m}")
    g = as_genotype(genotype)
    if g.size != spec.length:
        raise ValueError(f"expected a string of length {spec.length}, got {g.size}")
    block = g[list(spec.true_partition[block_index])]
    return tuple(int(b) for b in block) == spec.optimal_pattern


def evaluate_population(spec: ProblemSpec, pop: Population) -> np.ndarray:
    return evaluate_many(spec, pop.bits)
