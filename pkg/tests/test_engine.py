import numpy as np
import pytest

from ecga.engine import RunConfig, bb_convergence_count, run_ecga
from ecga.genome import Population
from ecga.problems import onemax, trap


def test_onemax_easy_success():
    wins = sum(run_ecga(RunConfig(onemax(10), n=200, s=4, seed=seed)).success for seed in range(30))
    assert wins >= 29


@pytest.mark.parametrize("p_i", [0.0, 0.3, 0.8])
def test_evaluation_accounting(p_i):
    cfg = RunConfig(trap(3, 4), n=160, s=8, p_i=p_i, seed=11)
    stats = run_ecga(cfg)
    assert stats.evaluations == cfg.n + sum(stats.evaluations_per_generation)
    assert len(stats.evaluations_per_generation) == stats.generations
    offspring = cfg.n * stats.generations
    if offspring:
        spent = sum(stats.evaluations_per_generation)
        sd = np.sqrt(offspring * p_i * (1 - p_i))
        assert abs(spent - offspring * (1 - p_i)) <= 4 * sd + 1e-9


def test_no_inheritance_evaluates_everything():
    stats = run_ecga(RunConfig(onemax(20), n=40, s=4, seed=1))
    assert all(e == 40 for e in stats.evaluations_per_generation)
    assert stats.evaluations == 40 * (stats.generations + 1)


def test_full_inheritance_only_evaluates_initial_population():
    stats = run_ecga(RunConfig(onemax(20), n=80, s=4, p_i=1.0, seed=3))
    assert stats.evaluations == 80
    assert stats.generations >= 1


def test_zero_inheritance_matches_plain_ecga():
    cfg = RunConfig(trap(4, 4), n=240, s=8, p_i=0.0, seed=21)
    assert run_ecga(cfg) == run_ecga(cfg, inheritance=False)


def test_reproducible():
    cfg = RunConfig(onemax(30), n=60, s=4, p_i=0.5, seed=8)
    assert run_ecga(cfg) == run_ecga(cfg)


def test_generation_cap_counts_as_failure():
    stats = run_ecga(RunConfig(onemax(40), n=8, s=4, p_i=0.5, max_generations=1, seed=0))
    assert stats.generations == 1
    assert not stats.converged and not stats.success


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(onemax(5), n=10, s=4)
    with pytest.raises(ValueError):
        RunConfig(onemax(5), n=8, s=4, p_i=1.2)


def test_schema_pool_choice():
    with pytest.raises(ValueError):
        RunConfig(onemax(8), n=8, s=4, schema_pool="offspring")
    base = RunConfig(onemax(30), n=80, s=4, p_i=0.6, seed=5)
    sel = run_ecga(RunConfig(onemax(30), n=80, s=4, p_i=0.6, seed=5, schema_pool="selected"))
    par = run_ecga(base)
    assert sel.evaluations == 80 + sum(sel.evaluations_per_generation)
    # the first generation is identical, the estimates then differ
    assert sel.evaluations_per_generation[0] == par.evaluations_per_generation[0]
    assert sel != par


def test_observer_sees_each_generation():
    seen = []

    def observe(*, generation, parents, pool, model, table, offspring):
        seen.append((generation, parents.size, pool.size, model.length, table is None, offspring.size))

    stats = run_ecga(RunConfig(trap(3, 4), n=96, s=8, p_i=0.5, seed=2), observer=observe)
    assert [g for g, *_ in seen] == list(range(1, stats.generations + 1))
    assert all(tuple(rest) == (96, 96, 12, False, 96) for _, *rest in seen)


def test_bb_generations_within_run():
    stats = run_ecga(RunConfig(onemax(20), n=120, s=4, seed=4))
    assert stats.success
    assert stats.bb_generations is not None and 1 <= stats.bb_generations <= stats.generations


def _population(rows):
    bits = np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)
    return Population.from_bits(bits)


def test_bb_count_converged_onemax():
    assert bb_convergence_count(_population(["11111"] * 4), onemax(5)) == 5


def test_bb_count_one_deceived_block():
    spec = trap(10, 4)
    row = "0000" + "1111" * 9
    assert bb_convergence_count(_population([row] * 6), spec) == 9


def test_bb_count_tie_is_incorrect():
    spec = trap(2, 4)
    pop = _population(["11111111", "00001111"])
    assert bb_convergence_count(pop, spec) == 1
