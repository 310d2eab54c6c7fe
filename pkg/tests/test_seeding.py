import random

from rasesim.seeding import derive_seed
from rasesim.solver import Fitness, compare_fitness


def test_derive_seed_is_stable_across_processes():
    # frozen values: changing the derivation silently breaks every recorded
    # deterministic run, so make it loud instead
    assert derive_seed(0, "sfcrs") == 2980356986981598681
    assert derive_seed(42, "engine") == 3833408282171865294
    assert derive_seed(7, "eval", 3, 11) == 2521087256120781367


def test_derive_seed_distinguishes_components():
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1, "a") != derive_seed("1", "a")
    assert derive_seed(1, 2) != derive_seed(12)
    assert derive_seed(1, "x", 2) != derive_seed(1, "x", 3)


def test_derive_seed_fits_python_random():
    seed = derive_seed(2**63, "anything", -5)
    assert 0 <= seed < 2**63
    random.Random(seed)


def test_fitness_ordering_laws():
    rng = random.Random(6)
    pool = [Fitness(rng.choice((0.0, 0.25, 0.5, 1.0)),
                    rng.choice((None, 10.0, 10.0, 250.0)))
            for _ in range(60)]
    pool = [f if f.acceptance_ratio > 0 else Fitness(0.0, None) for f in pool]
    for a in pool[:20]:
        for b in pool[:20]:
            assert compare_fitness(a, b) == -compare_fitness(b, a)
            for c in pool[:10]:
                if compare_fitness(a, b) >= 0 and compare_fitness(b, c) >= 0:
                    assert compare_fitness(a, c) >= 0
