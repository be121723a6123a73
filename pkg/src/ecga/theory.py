"""Closed-form scaling models for fitness inheritance.

Inheritance acts as additive Gaussian noise with variance ``p_i * sigma_f^2``.
Plugging that noise into the gambler's-ruin population-sizing model and
the noisy convergence-time model gives the ratios below; the constants
``c_n`` and ``c_t`` only matter for absolute predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Inheritance probability above which the per-BB noise approximation breaks down.
VALIDITY_LIMIT = 0.85


@dataclass(frozen=True)
class TheoryInputs:
    p_i: float = 0.0
    m: int = 1
    k: int = 1
    sigma_bb_sq: float = 1.0
    alpha: float = 0.5
    c_n: float = 1.0
    c_t: float = 1.0
    sigma_f_sq: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_i <= 1.0:
            raise ValueError("p_i must lie in [0, 1]")
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.sigma_bb_sq < 0 or (self.sigma_f_sq is not None and self.sigma_f_sq < 0):
            raise ValueError("variances must be non-negative")

    @property
    def fitness_variance(self) -> float:
        """``sigma_f^2``; defaults to ``m * sigma_BB^2`` for uniformly scaled blocks."""
        return self.m * self.sigma_bb_sq if self.sigma_f_sq is None else self.sigma_f_sq

    @property
    def valid(self) -> bool:
        return self.p_i < VALIDITY_LIMIT


def inheritance_noise_variance(inputs: TheoryInputs) -> float:
    return inputs.p_i * inputs.fitness_variance


def population_size(inputs: TheoryInputs) -> float:
    """``-c_n ln(alpha) 2^k sigma_f^2 (1 + p_i)``."""
    return -inputs.c_n * math.log(inputs.alpha) * 2 ** inputs.k * inputs.fitness_variance * (1 + inputs.p_i)


def population_size_ratio(p_i):
    return 1 + np.asarray(p_i, dtype=float) if np.ndim(p_i) else 1.0 + p_i


def convergence_time(inputs: TheoryInputs) -> float:
    """``c_t sqrt(m k) sqrt(1 + sigma_N^2 / sigma_f^2)``."""
    var = inputs.fitness_variance
    noise_ratio = inheritance_noise_variance(inputs) / var if var > 0 else inputs.p_i
    return inputs.c_t * math.sqrt(inputs.m * inputs.k) * math.sqrt(1 + noise_ratio)


def convergence_time_ratio(p_i):
    return np.sqrt(1 + np.asarray(p_i, dtype=float)) if np.ndim(p_i) else math.sqrt(1.0 + p_i)


def function_evaluations(n, t_c, p_i):
    """Evaluations of a run: all of generation 0, then ``n (1 - p_i)`` per generation."""
    return n + n * (t_c - 1) * (1 - p_i)


def function_evaluation_ratio(p_i, t_c0: float | None = None):
    """Evaluations relative to ``p_i = 0``.

    Without ``t_c0`` this is the approximation ``(1 + p_i)^1.5 (1 - p_i)``;
    given the no-inheritance convergence time ``t_c0`` it is the exact form
    ``n_r [t_r (1 - p_i) + p_i / t_c0]``.
    """
    p = np.asarray(p_i, dtype=float)
    ratio = population_size_ratio(p) * convergence_time_ratio(p) * (1 - p)
    if t_c0 is not None:
        ratio = ratio + population_size_ratio(p) * p / t_c0
    return ratio if np.ndim(p_i) else float(ratio)


def speedup(p_i):
    """Inverse of the approximate evaluation ratio; infinite at ``p_i = 1``."""
    ratio = function_evaluation_ratio(p_i)
    with np.errstate(divide="ignore"):
        out = 1.0 / np.asarray(ratio, dtype=float)
    return out if np.ndim(p_i) else float(out)


def theory_table(grid, t_c0: float | None = None) -> list[dict]:
    """Rows for the ``theory`` CLI command, one per grid value."""
    rows = []
    for p in grid:
        p = float(p)
        rows.append({
            "p_i": p,
            "n_ratio": population_size_ratio(p),
            "tc_ratio": convergence_time_ratio(p),
            "nfe_ratio_exact": function_evaluation_ratio(p, t_c0) if t_c0 is not None else float("nan"),
            "nfe_ratio_approx": function_evaluation_ratio(p),
            "speedup": speedup(p),
            "validity_flag": "ok" if p < VALIDITY_LIMIT else "outside-model",
        })
    return rows
