"""Binary genotypes, individuals and fixed-size populations.

A population is stored column-wise: an ``(n, length)`` ``uint8`` allele
matrix, a fitness vector and a provenance vector. All arrays are made
read-only on construction so a population can be shared freely between
runs; operations return new populations instead of mutating.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

#: Absolute tolerance used by :func:`all_same_fitness`.
FITNESS_TOLERANCE = 1e-9


class Provenance(enum.IntEnum):
    UNSET = 0
    EVALUATED = 1
    INHERITED = 2


def as_genotype(bits: Sequence[int] | np.ndarray | str) -> np.ndarray:
    """Return ``bits`` as a read-only ``uint8`` vector, validating alleles.

    Strings such as ``"0110"`` are accepted for convenience.
    """
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    arr = np.array(bits, dtype=np.int64).reshape(-1)
    if arr.size == 0:
        raise ValueError("genotype must have at least one locus")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("alleles must be 0 or 1")
    out = arr.astype(np.uint8)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Individual:
    genotype: np.ndarray
    fitness: float = float("nan")
    provenance: Provenance = Provenance.UNSET


def _frozen(arr: np.ndarray) -> np.ndarray:
    # view, not copy: this runs several times per generation
    view = np.ascontiguousarray(arr).view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True, eq=False)
class Population:
    """``n`` individuals sharing a string length.

    Attributes:
        bits: ``(n, length)`` allele matrix.
        fitness: fitness per member; NaN where provenance is unset.
        provenance: :class:`Provenance` code per member.
    """

    bits: np.ndarray
    fitness: np.ndarray
    provenance: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("population needs shape (n >= 1, length >= 1)")
        if bits.dtype != np.uint8:
            if np.any((bits != 0) & (bits != 1)):
                raise ValueError("alleles must be 0 or 1")
            bits = bits.astype(np.uint8)
        fitness = np.asarray(self.fitness, dtype=np.float64)
        provenance = np.asarray(self.provenance, dtype=np.int8)
        if fitness.shape != (bits.shape[0],) or provenance.shape != (bits.shape[0],):
            raise ValueError("fitness/provenance must have one entry per member")
        assigned = provenance != Provenance.UNSET
        if not np.all(np.isfinite(fitness[assigned])):
            raise ValueError("assigned fitness values must be finite")
        object.__setattr__(self, "bits", _frozen(bits))
        object.__setattr__(self, "fitness", _frozen(fitness))
        object.__setattr__(self, "provenance", _frozen(provenance))

    @classmethod
    def from_bits(cls, bits) -> Population:
        """Population with unset fitness for every member."""
        bits = np.asarray(bits)
        n = bits.shape[0]
        return cls(bits, np.full(n, np.nan), np.zeros(n, dtype=np.int8))

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    @property
    def length(self) -> int:
        return self.bits.shape[1]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> Individual:
        return Individual(self.bits[i], float(self.fitness[i]), Provenance(int(self.provenance[i])))

    def __iter__(self) -> Iterator[Individual]:
        return (self[i] for i in range(self.size))

    def take(self, index) -> Population:
        """Members at ``index`` (copies; repeats allowed)."""
        index = np.asarray(index, dtype=np.intp)
        return Population(self.bits[index], self.fitness[index], self.provenance[index])

    def with_fitness(self, fitness, provenance) -> Population:
        return Population(self.bits, fitness, provenance)

    def require_assigned(self) -> None:
        if np.any(self.provenance == Provenance.UNSET):
            raise ValueError("population contains members without a fitness")


def random_population(n: int, length: int, rng: np.random.Generator) -> Population:
    """``n`` strings of i.i.d. fair bits, all with unset fitness."""
    if n < 1 or length < 1:
        raise ValueError(f"need n >= 1 and length >= 1, got n={n}, length={length}")
    bits = rng.integers(0, 2, size=(n, length), dtype=np.uint8)
    return Population.from_bits(bits)


def all_same_fitness(pop: Population, tol: float = FITNESS_TOLERANCE) -> bool:
    pop.require_assigned()
    return bool(pop.fitness.max() - pop.fitness.min() <= tol)
