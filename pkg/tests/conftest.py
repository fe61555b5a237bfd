import sys
from pathlib import Path

import pytest

from reselim.graph import WeightedGraph, gen_star

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def star():
    return gen_star(10, 0.5)


@pytest.fixture
def path3():
    return WeightedGraph.from_edges(3, [0, 1], [1, 2], [0.5, 0.5])


def random_small_graph(rng, n_max=6, e_max=9, p_choices=None, e_min=1):
    """Random directed graph with a bounded number of edges."""
    n = int(rng.integers(2, n_max + 1))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    hi = min(e_max, len(pairs))
    m = int(rng.integers(min(e_min, hi), hi + 1))
    pick = rng.choice(len(pairs), size=m, replace=False)
    src = [pairs[i][0] for i in pick]
    dst = [pairs[i][1] for i in pick]
    if p_choices is None:
        probs = rng.uniform(0.05, 0.95, size=m)
    else:
        probs = rng.choice(p_choices, size=m)
    return WeightedGraph.from_edges(n, src, dst, probs)


def random_multiset(rng, n, max_total=4):
    total = int(rng.integers(1, max_total + 1))
    d = {}
    for v in rng.integers(0, n, size=total):
        d[int(v)] = d.get(int(v), 0) + 1
    return d


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
