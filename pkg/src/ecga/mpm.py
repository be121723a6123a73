"""Marginal product models: MDL scoring, greedy structure search, sampling.

A partition is a tuple of groups, each a sorted tuple of loci, with groups
ordered by their smallest locus. Configuration ``j`` of a group is the
group's alleles read as a binary number, lowest locus most significant,
so ``00..0`` is index 0 and ``11..1`` is index ``2**k - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .genome import Population

Partition = tuple[tuple[int, ...], ...]

MARGINAL_TOLERANCE = 1e-9
# two merge scores closer than this are treated as tied
TIE_TOLERANCE = 1e-9


class ModelConstraintError(ValueError):
    """A group has more configurations than the population can support."""


def normalize_partition(groups: Iterable[Iterable[int]], length: int | None = None) -> Partition:
    """Canonical form of ``groups``; checks they are disjoint and cover ``0..length-1``."""
    part = tuple(sorted((tuple(sorted(int(i) for i in g)) for g in groups), key=lambda g: g[0] if g else -1))
    if any(len(g) == 0 for g in part):
        raise ValueError("empty group in partition")
    loci = sorted(i for g in part for i in g)
    if length is None:
        length = len(loci)
    if loci != list(range(length)):
        raise ValueError(f"groups must partition loci 0..{length - 1} exactly")
    return part


def univariate(length: int) -> Partition:
    return tuple((i,) for i in range(length))


def config_codes(bits: np.ndarray, group: Sequence[int]) -> np.ndarray:
    """Configuration index of ``group`` for every row of ``bits``."""
    weights = 1 << np.arange(len(group) - 1, -1, -1, dtype=np.int64)
    return np.asarray(bits)[:, list(group)].astype(np.int64) @ weights


def partition_codes(bits: np.ndarray, groups: Partition) -> np.ndarray:
    """Configuration index of every group for every row, shape ``(n, len(groups))``."""
    bits = np.asarray(bits)
    weights = np.zeros((bits.shape[1], len(groups)))
    for gi, g in enumerate(groups):
        weights[list(g), gi] = 2.0 ** np.arange(len(g) - 1, -1, -1)
    # float product is exact here (indices < 2**53) and goes through BLAS
    return (bits.astype(np.float64) @ weights).astype(np.int64)


def group_counts(codes: np.ndarray, groups: Partition, weights: np.ndarray | None = None) -> list[np.ndarray]:
    """Per-group configuration counts (or weight sums) from :func:`partition_codes` output."""
    widths = np.array([2 ** len(g) for g in groups], dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(widths)[:-1]))
    flat = (codes + offsets).ravel()
    if weights is not None:
        weights = np.repeat(weights, len(groups))
    counts = np.bincount(flat, weights=weights, minlength=int(widths.sum()))
    return np.split(counts, offsets[1:])


def _check_sizes(groups: Partition, n: int) -> None:
    for g in groups:
        # univariate groups are always admissible; the bound only limits merges
        if len(g) > 1 and 2 ** len(g) > n:
            raise ModelConstraintError(f"group {g} has 2^{len(g)} configurations but n = {n}")


@dataclass(frozen=True, eq=False)
class PartitionModel:
    """Disjoint locus groups with a marginal frequency table per group."""

    groups: Partition
    marginals: tuple[np.ndarray, ...]
    n: int

    def __post_init__(self):
        if len(self.groups) != len(self.marginals):
            raise ValueError("one marginal table per group required")
        for g, p in zip(self.groups, self.marginals):
            if p.shape != (2 ** len(g),):
                raise ValueError(f"group {g} needs a table of {2 ** len(g)} frequencies")
            p.flags.writeable = False
        flat = np.concatenate(self.marginals)
        sums = np.add.reduceat(flat, np.cumsum([0] + [p.size for p in self.marginals[:-1]]))
        if np.any(flat < 0) or np.any(flat > 1) or np.any(np.abs(sums - 1.0) > MARGINAL_TOLERANCE):
            raise ValueError("every group's marginals must form a distribution")
        _check_sizes(self.groups, self.n)

    @property
    def length(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def group_sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def format(self) -> str:
        """One line per group: loci, then frequencies in configuration order."""
        lines = []
        for g, p in zip(self.groups, self.marginals):
            freqs = " ".join(f"{x:.4f}" for x in p)
            lines.append(f"[{','.join(map(str, g))}] {freqs}")
        return "\n".join(lines)


@dataclass(frozen=True)
class MdlScore:
    model: float
    population: float

    @property
    def combined(self) -> float:
        return self.model + self.population

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.combined)


INFEASIBLE = MdlScore(math.inf, math.inf)


def marginal_frequencies(groups, pop: Population | np.ndarray) -> PartitionModel:
    """Frequency of every configuration of every group in ``pop``."""
    bits = pop.bits if isinstance(pop, Population) else np.asarray(pop)
    if bits.ndim != 2 or bits.shape[0] == 0:
        raise ValueError("cannot estimate marginals from an empty population")
    n, length = bits.shape
    part = normalize_partition(groups, length)
    tables = tuple(c / n for c in group_counts(partition_codes(bits, part), part))
    return PartitionModel(part, tables, n)


def model_complexity(groups, n: int) -> float:
    """Bits needed to store the marginal frequencies, ``log2(n) * sum(2^k_i - 1)``."""
    if n < 2:
        raise ValueError("model complexity needs n >= 2")
    return math.log2(n) * sum(2 ** len(g) - 1 for g in groups)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def compressed_population_complexity(model: PartitionModel, n: int | None = None) -> float:
    """``n`` times the summed entropy of the group marginals, in bits."""
    n = model.n if n is None else n
    return n * sum(_entropy_bits(p) for p in model.marginals)


def combined_complexity(groups, pop: Population | np.ndarray, n: int | None = None) -> MdlScore:
    """MDL score of a partition on ``pop``; :data:`INFEASIBLE` if a group is too large."""
    bits = pop.bits if isinstance(pop, Population) else np.asarray(pop)
    n = bits.shape[0] if n is None else n
    part = normalize_partition(groups, bits.shape[1])
    try:
        _check_sizes(part, n)
    except ModelConstraintError:
        return INFEASIBLE
    model = marginal_frequencies(part, bits)
    return MdlScore(model_complexity(part, n), compressed_population_complexity(model, n))


def _xlog2x(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a, dtype=np.float64)
    pos = a > 0
    out[pos] = a[pos] * np.log2(a[pos])
    return out


def greedy_model_search(pop: Population | np.ndarray, trace: list[float] | None = None) -> PartitionModel:
    """Find a low-MDL partition by greedily merging pairs of groups.

    Starts from the univariate model and, while some pairwise merge lowers
    the combined complexity, applies the one with the lowest resulting
    score. Ties prefer the smaller merged group, then the pair with the
    smallest leading loci. Merges with ``2**k > n`` are never considered.

    If ``trace`` is given, the combined score of the starting model and of
    every accepted model is appended to it.

    Only score differences are tracked: merging groups ``a`` and ``b``
    changes the model cost by ``log2(n) * (2^ka - 1)(2^kb - 1)`` and the
    population cost by ``S_a + S_b - S_ab - n log2 n`` with
    ``S = sum(c log2 c)`` over configuration counts ``c``.
    """
    bits = pop.bits if isinstance(pop, Population) else np.asarray(pop)
    n, length = bits.shape
    if n == 0:
        raise ValueError("cannot build a model from an empty population")
    if n < 2 or length == 1:
        model = marginal_frequencies(univariate(length), bits)
        if trace is not None and n >= 2:
            trace.append(model_complexity(model.groups, n) + compressed_population_complexity(model))
        return model

    log_n = math.log2(n)
    n_log_n = n * log_n
    clogc = _xlog2x(np.arange(n + 1, dtype=np.float64))
    x = bits.astype(np.float64)

    # slot i holds the group whose smallest locus is i; merged-away slots go inactive
    members: list[list[int] | None] = [[i] for i in range(length)]
    active = np.ones(length, dtype=bool)
    sizes = np.ones(length, dtype=np.int64)
    codes = bits.astype(np.int64)

    ones = x.sum(axis=0)
    both = x.T @ x
    s_group = _xlog2x(ones) + _xlog2x(n - ones)
    s_pair = (_xlog2x(both) + _xlog2x(ones[:, None] - both)
              + _xlog2x(ones[None, :] - both)
              + _xlog2x(n - ones[:, None] - ones[None, :] + both))
    delta = log_n + (s_group[:, None] + s_group[None, :] - s_pair - n_log_n)
    if n < 4:
        delta[:] = np.inf
    delta[np.tril_indices(length)] = np.inf

    current = log_n * length + length * n_log_n - s_group.sum()
    if trace is not None:
        trace.append(float(current))

    while True:
        best = delta.min()
        if not best < 0:
            break
        cand_a, cand_b = np.nonzero(delta <= best + TIE_TOLERANCE)
        a, b = min(zip(cand_a.tolist(), cand_b.tolist()), key=lambda ab: (sizes[ab[0]] + sizes[ab[1]], ab))
        current += delta[a, b]
        if trace is not None:
            trace.append(float(current))

        kb = int(sizes[b])
        codes[:, a] = (codes[:, a] << kb) | codes[:, b]
        members[a] = members[a] + members[b]
        members[b] = None
        active[b] = False
        sizes[a] += kb
        ka = int(sizes[a])
        s_group[a] = clogc[np.bincount(codes[:, a], minlength=2 ** ka)].sum()
        delta[b, :] = np.inf
        delta[:, b] = np.inf

        others = np.flatnonzero(active)
        others = others[others != a]
        width = 2 ** (ka + sizes[others])
        fits = width <= n
        delta[np.minimum(a, others[~fits]), np.maximum(a, others[~fits])] = np.inf
        others, width = others[fits], width[fits]
        if others.size == 0:
            continue
        offsets = np.concatenate(([0], np.cumsum(width)[:-1]))
        joint = ((codes[:, a:a + 1] << sizes[others]) | codes[:, others]) + offsets
        counts = np.bincount(joint.ravel(), minlength=int(width.sum()))
        s_joint = np.add.reduceat(clogc[counts], offsets)
        model_cost = (2 ** ka - 1) * (2 ** sizes[others] - 1)
        delta[np.minimum(a, others), np.maximum(a, others)] = (
            log_n * model_cost + (s_group[a] + s_group[others] - s_joint - n_log_n))

    groups = [m for m in members if m is not None]
    return marginal_frequencies(groups, bits)


def sample_offspring(model: PartitionModel, n: int, rng: np.random.Generator) -> Population:
    """Draw ``n`` strings, sampling each group's configuration independently."""
    uniforms = rng.random((len(model.groups), n))
    cfg = np.empty((n, len(model.groups)), dtype=np.int64)
    for gi, (p, u) in enumerate(zip(model.marginals, uniforms)):
        cfg[:, gi] = np.minimum(np.searchsorted(np.cumsum(p), u, side="right"), p.size - 1)
    loci, owner, shift = [], [], []
    for gi, g in enumerate(model.groups):
        loci += g
        owner += [gi] * len(g)
        shift += range(len(g) - 1, -1, -1)
    bits = np.empty((n, model.length), dtype=np.uint8)
    bits[:, loci] = (cfg[:, owner] >> np.array(shift)) & 1
    return Population.from_bits(bits)
