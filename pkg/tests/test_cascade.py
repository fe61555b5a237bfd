import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reselim.cascade import (CascadeConfig, SeedMultiset, combined_probability,
                             estimate_spread, simulate_once, spread_counts, summarize)
from reselim.graph import WeightedGraph, gen_random
from reselim.rng import RunStream


def test_seed_multiset_basics():
    m = SeedMultiset.parse("3:2, 1,3")
    assert dict(m) == {1: 1, 3: 3}
    assert m.size == 4 and m.unique_count == 2
    assert m.add(1) == {1: 2, 3: 3}
    assert m.support() == {1: 1, 3: 1}
    assert SeedMultiset([2, 2, 5]) == {2: 2, 5: 1}
    assert SeedMultiset.parse("") == {}
    with pytest.raises(ValueError):
        SeedMultiset.parse("1:0")
    with pytest.raises(ValueError):
        SeedMultiset.parse("a")


def test_config_validation():
    with pytest.raises(ValueError):
        CascadeConfig(alpha=1.5)
    with pytest.raises(ValueError):
        CascadeConfig(runs=0)


def test_combined_probability():
    assert combined_probability(0.5, 2, 1.0) == 0.75
    assert combined_probability(0.5, 2, 0.5) == 0.625
    # alpha = 0 keeps the first chance bit for bit
    for p in (0.1, 0.3, 0.7):
        assert combined_probability(p, 5, 0.0) == p
    assert combined_probability(0.2, 1, 0.9) == 0.2


def test_simulate_once_deterministic_path():
    g = WeightedGraph.from_edges(3, [0, 1], [1, 2], [1.0, 1.0])
    assert simulate_once(g, {0: 1}, 1.0, RunStream(0, 0)) == 3
    assert simulate_once(g, {0: 1}, 1.0, np.random.default_rng(0)) == 3


def test_simulate_once_zero_probabilities():
    g = gen_random(6, 1.0, 0.0, 0)
    for r in range(20):
        assert simulate_once(g, {1: 1, 4: 3}, 1.0, RunStream(9, r)) == 2


def test_simulate_once_unknown_seed(star):
    with pytest.raises(ValueError):
        simulate_once(star, {42: 1}, 1.0, RunStream(0, 0))


def test_simulate_once_star_reselection_mean(star):
    # per-leaf activation 1 - 0.5**2 = 0.75, so mean = 1 + 10 * 0.75 = 8.5
    rng = np.random.default_rng(2024)
    counts = [simulate_once(star, {0: 2}, 1.0, rng) for _ in range(10_000)]
    assert abs(np.mean(counts) - 8.5) <= 0.05


@pytest.mark.parametrize("seeds, alpha, expected", [
    ({0: 1}, 1.0, 6.0),    # 1 + 10 * 0.5
    ({0: 2}, 1.0, 8.5),    # 1 + 10 * 0.75
    ({0: 2}, 0.5, 7.25),   # 1 + 10 * (1 - 0.5 * 0.75)
])
def test_estimate_spread_star(star, seeds, alpha, expected):
    est = estimate_spread(star, seeds, CascadeConfig(alpha, 10_000, 11))
    assert abs(est.mean - expected) <= 0.05
    assert est.runs == 10_000 and est.std_error > 0


def test_estimate_spread_all_nodes_seeded(star):
    est = estimate_spread(star, {v: 1 for v in range(11)}, CascadeConfig(runs=500))
    assert est.mean == 11 and est.std_error == 0


def test_batched_engine_matches_scalar_runs():
    g = gen_random(12, 0.3, 0.4, 3)
    seeds = SeedMultiset({0: 2, 5: 1})
    counts = spread_counts(g, seeds, 0.6, 300, 77)
    assert [simulate_once(g, seeds, 0.6, RunStream(77, r)) for r in range(300)] == counts.tolist()


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.integers(0, 1000))
def test_results_independent_of_workers_and_batching(workers, seed):
    g = gen_random(15, 0.2, 0.5, seed)
    cfg1 = CascadeConfig(0.7, 777, seed)
    cfgw = CascadeConfig(0.7, 777, seed, workers=workers)
    assert estimate_spread(g, {1: 3, 2: 1}, cfg1) == estimate_spread(g, {1: 3, 2: 1}, cfgw)
    # a prefix of runs is a prefix of the counts
    full = spread_counts(g, {1: 3}, 0.7, 400, seed)
    assert np.array_equal(spread_counts(g, {1: 3}, 0.7, 150, seed), full[:150])


def test_common_random_numbers_make_spread_monotone():
    g = gen_random(20, 0.15, 0.4, 8)
    base = spread_counts(g, {0: 1}, 0.5, 500, 1)
    more = spread_counts(g, {0: 2, 3: 1}, 0.5, 500, 1)
    assert np.all(more >= base)


def test_spread_bounds():
    g = gen_random(10, 0.3, 0.5, 4)
    est = estimate_spread(g, {0: 2, 7: 1}, CascadeConfig(runs=200))
    assert 2 <= est.mean <= 10


def test_summarize_matches_numpy():
    counts = np.array([3, 5, 5, 9, 1])
    est = summarize(counts)
    assert est.mean == counts.mean()
    assert abs(est.std_error - counts.std(ddof=1) / np.sqrt(5)) < 1e-12
    assert summarize(np.array([4])).std_error == 0.0
