import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecga.genome import Population, Provenance
from ecga.inheritance import (InheritanceConfig, NoEvaluatedParents, assign_fitness, estimate_schema_fitness,
                              inherited_fitness, inherited_fitness_many)
from ecga.mpm import marginal_frequencies
from ecga.problems import evaluate_many, onemax, trap


def _evaluated(bits, fitness, provenance=None):
    bits = np.asarray(bits, dtype=np.uint8)
    if provenance is None:
        provenance = np.full(len(bits), Provenance.EVALUATED)
    return Population(bits, np.asarray(fitness, dtype=float), provenance)


POOL = _evaluated([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 2])


def test_hand_example():
    table = estimate_schema_fitness([[0], [1]], POOL)
    assert table.evaluated_mean == 1.0
    assert table.fitness[0].tolist() == [-0.5, 0.5]
    assert table.fitness[1].tolist() == [-0.5, 0.5]
    assert inherited_fitness(table, [1, 1]) == 2.0
    assert inherited_fitness(table, [0, 1]) == 1.0


def test_identical_parents_have_zero_schema_fitness():
    pool = _evaluated([[1, 0, 1]] * 5, [7.0] * 5)
    table = estimate_schema_fitness([[0, 1], [2]], pool)
    assert all(np.all(t == 0) for t in table.fitness)


def test_schemata_listed_for_example_model(rng):
    bits = rng.integers(0, 2, size=(16, 4), dtype=np.uint8)
    table = estimate_schema_fitness(marginal_frequencies([[0, 2], [1], [3]], bits).groups,
                                    _evaluated(bits, bits.sum(axis=1)))
    assert table.schemata(4) == ["0*0*", "0*1*", "1*0*", "1*1*", "*0**", "*1**", "***0", "***1"]
    assert table.n_schemata == 8


def test_absent_schema_contributes_zero():
    pool = _evaluated([[0, 0], [0, 1]], [0.0, 1.0])
    table = estimate_schema_fitness([[0], [1]], pool)
    assert table.fitness[0][1] == 0.0
    assert inherited_fitness(table, [1, 1]) == 0.5 + 0.0 + 0.5


def test_only_evaluated_parents_count():
    prov = np.array([Provenance.EVALUATED, Provenance.EVALUATED, Provenance.INHERITED, Provenance.INHERITED])
    pool = _evaluated([[0, 0], [1, 1], [1, 0], [0, 1]], [0, 2, 100, 100], prov)
    table = estimate_schema_fitness([[0], [1]], pool)
    assert table.n_evaluated == 2 and table.evaluated_mean == 1.0
    assert table.fitness[0].tolist() == [-1.0, 1.0]


def test_no_evaluated_parents():
    pool = _evaluated([[0, 0]], [1.0], np.array([Provenance.INHERITED]))
    with pytest.raises(NoEvaluatedParents):
        estimate_schema_fitness([[0], [1]], pool)


@pytest.mark.parametrize("spec", [onemax(2), onemax(3), trap(2, 4), trap(3, 2)])
def test_exact_reconstruction_on_balanced_pool(spec):
    bits = np.array(list(itertools.product([0, 1], repeat=spec.length)), dtype=np.uint8)
    f = evaluate_many(spec, bits)
    table = estimate_schema_fitness(spec.true_partition, _evaluated(bits, f))
    np.testing.assert_allclose(inherited_fitness_many(table, bits), f, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 60), st.integers(1, 6), st.integers(0, 2**31))
def test_deviations_sum_to_zero(n, length, seed):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n, length), dtype=np.uint8)
    f = rng.normal(10, 3, size=n)
    groups = [list(range(0, length, 2)), list(range(1, length, 2))] if length > 1 else [[0]]
    table = estimate_schema_fitness(groups, _evaluated(bits, f))
    for est, cnt in zip(table.fitness, table.counts):
        assert abs((cnt * est).sum()) <= 1e-6 * n * abs(table.evaluated_mean + 1)
        assert np.all(est[cnt == 0] == 0)


def _offspring(n, length, rng):
    return Population.from_bits(rng.integers(0, 2, size=(n, length), dtype=np.uint8))


def test_assign_all_evaluated(rng):
    pop, used = assign_fitness(_offspring(50, 4, rng), 0.0, None, onemax(4), rng)
    assert used == 50 and np.all(pop.provenance == Provenance.EVALUATED)
    np.testing.assert_array_equal(pop.fitness, pop.bits.sum(axis=1))


def test_assign_all_inherited(rng):
    table = estimate_schema_fitness([[0], [1]], POOL)
    pop, used = assign_fitness(_offspring(50, 2, rng), 1.0, table, onemax(2), rng)
    assert used == 0 and np.all(pop.provenance == Provenance.INHERITED)


def test_assign_half(rng):
    table = estimate_schema_fitness([[0], [1]], POOL)
    n = 10_000
    pop, used = assign_fitness(_offspring(n, 2, rng), InheritanceConfig(0.5), table, onemax(2), rng)
    assert abs(used - n / 2) <= 3 * np.sqrt(n * 0.25)
    assert used == np.count_nonzero(pop.provenance == Provenance.EVALUATED)


def test_inherited_members_never_evaluated(rng, monkeypatch):
    import ecga.inheritance as inh
    calls = []
    real = inh.evaluate_many
    monkeypatch.setattr(inh, "evaluate_many", lambda spec, bits: calls.append(len(bits)) or real(spec, bits))
    table = estimate_schema_fitness([[0], [1]], POOL)
    _, used = assign_fitness(_offspring(1000, 2, rng), 0.7, table, onemax(2), rng)
    assert sum(calls) == used


def test_assign_rejects_assigned_offspring(rng):
    with pytest.raises(ValueError):
        assign_fitness(POOL, 0.0, None, onemax(2), rng)


def test_config_bounds():
    with pytest.raises(ValueError):
        InheritanceConfig(1.5)
