"""Extended compact GA with building-block-wise fitness inheritance."""

from .engine import RunConfig, RunStats, bb_convergence_count, run_ecga
from .genome import Individual, Population, Provenance, all_same_fitness, random_population
from .inheritance import (InheritanceConfig, SchemaFitnessTable, assign_fitness, estimate_schema_fitness,
                          inherited_fitness)
from .mpm import (MdlScore, PartitionModel, combined_complexity, compressed_population_complexity,
                  greedy_model_search, marginal_frequencies, model_complexity, sample_offspring)
from .problems import ProblemSpec, block_is_optimal, evaluate, onemax, trap
from .selection import SelectionConfig, tournament_select

__version__ = "0.1.0"
