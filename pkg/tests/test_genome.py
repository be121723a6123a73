import numpy as np
import pytest

from ecga.genome import Population, Provenance, all_same_fitness, as_genotype, random_population


def _with(fitness):
    pop = Population.from_bits(np.zeros((len(fitness), 3), dtype=np.uint8))
    return pop.with_fitness(fitness, np.full(len(fitness), Provenance.EVALUATED))


def test_random_population_degenerate(rng):
    pop = random_population(1, 1, rng)
    assert pop.size == 1 and pop.length == 1
    assert pop[0].genotype[0] in (0, 1)
    assert pop[0].provenance is Provenance.UNSET


@pytest.mark.parametrize("n, length", [(0, 5), (5, 0)])
def test_random_population_rejects_empty(rng, n, length):
    with pytest.raises(ValueError):
        random_population(n, length, rng)


def test_random_population_locus_frequencies():
    pop = random_population(1000, 100, np.random.default_rng(7))
    # direct counting, locus by locus
    freqs = [sum(int(pop.bits[r, i]) for r in range(1000)) / 1000 for i in range(100)]
    assert all(0.45 <= f <= 0.55 for f in freqs)


def test_random_population_converges_to_half():
    pop = random_population(10_000, 20, np.random.default_rng(99))
    assert np.all(np.abs(pop.bits.mean(axis=0) - 0.5) <= 0.02)


def test_same_seed_reproducible():
    a = random_population(50, 30, np.random.default_rng(3))
    b = random_population(50, 30, np.random.default_rng(3))
    assert np.array_equal(a.bits, b.bits)


def test_population_is_read_only(rng):
    pop = random_population(4, 4, rng)
    with pytest.raises(ValueError):
        pop.bits[0, 0] = 1
    with pytest.raises(ValueError):
        pop.fitness[0] = 1.0


def test_take_preserves_length_and_copies_rows(rng):
    pop = random_population(4, 6, rng)
    sub = pop.take([3, 3, 0, 1])
    assert sub.size == 4 and sub.length == 6
    assert np.array_equal(sub.bits[0], pop.bits[3])


@pytest.mark.parametrize("fitness, expected", [
    ([3.0, 3.0, 3.0], True),
    ([3.0, 2.0], False),
    ([3.0, 3.0 + 1e-12], True),
])
def test_all_same_fitness(fitness, expected):
    assert all_same_fitness(_with(fitness)) is expected


def test_all_same_fitness_requires_assigned(rng):
    with pytest.raises(ValueError):
        all_same_fitness(random_population(3, 3, rng))


def test_assigned_fitness_must_be_finite():
    with pytest.raises(ValueError):
        _with([1.0, float("nan")])


def test_as_genotype_validates():
    assert as_genotype("0110").tolist() == [0, 1, 1, 0]
    with pytest.raises(ValueError):
        as_genotype([0, 2])
