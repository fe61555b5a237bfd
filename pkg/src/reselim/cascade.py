"""Independent Cascade simulation with reselected, fading seeds.

A seed ``v`` of multiplicity ``m`` gets ``m`` chances on each out-neighbour
``u``; chance ``w`` succeeds with ``alpha**(w-1) * p_vu``.  The chances are
folded into one attempt at step 0 with the combined probability
``1 - prod(1 - alpha**(w-1) * p_vu)``, which gives the same spread
distribution because extra chances on an active node are no-ops.

Monte Carlo runs draw from counter-based streams (see :mod:`reselim.rng`):
run ``i`` and edge ``e`` always see the same coin, so estimates are
bit-identical across batch sizes and thread counts, and two seed multisets
evaluated under one master seed share their random worlds.
"""
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import rng as _rng

# bound on runs * node_count booleans held per batch
_BATCH_CELLS = 1 << 23


class SeedMultiset(Mapping):
    """Node id -> multiplicity (each at least 1)."""

    def __init__(self, entries=()):
        d = {}
        items = entries.items() if isinstance(entries, Mapping) else ((v, 1) for v in entries)
        for v, m in items:
            v, m = int(v), int(m)
            if m < 0:
                raise ValueError(f"negative multiplicity for node {v}")
            if m:
                d[v] = d.get(v, 0) + m
        self._d = dict(sorted(d.items()))

    @classmethod
    def parse(cls, text):
        """Parse ``"0:2,5,7:3"`` (a bare id means multiplicity 1)."""
        d = {}
        for tok in filter(None, (t.strip() for t in text.split(","))):
            node, _, mult = tok.partition(":")
            try:
                v, m = int(node), int(mult) if mult else 1
            except ValueError:
                raise ValueError(f"bad seed token {tok!r}") from None
            if m < 1:
                raise ValueError(f"multiplicity must be positive in {tok!r}")
            d[v] = d.get(v, 0) + m
        return cls(d)

    def __getitem__(self, v):
        return self._d[v]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._d.items()))

    def __repr__(self):
        return f"SeedMultiset({self._d})"

    @property
    def size(self):
        return sum(self._d.values())

    @property
    def unique_count(self):
        return len(self._d)

    def multiplicity(self, v):
        return self._d.get(v, 0)

    def add(self, v, count=1):
        d = dict(self._d)
        d[int(v)] = d.get(int(v), 0) + count
        return SeedMultiset(d)

    def support(self):
        return SeedMultiset({v: 1 for v in self._d})

    def format(self):
        return ",".join(f"{v}:{m}" for v, m in self._d.items())


def as_multiset(seeds):
    return seeds if isinstance(seeds, SeedMultiset) else SeedMultiset(seeds)


@dataclass(frozen=True)
class CascadeConfig:
    alpha: float = 1.0
    runs: int = 10_000
    master_seed: int = 0
    workers: int = 1  # never affects results

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    std_error: float
    runs: int


def combined_probability(p, multiplicity, alpha):
    """Chance that at least one of ``multiplicity`` faded attempts succeeds.

    Uses ``alpha**0 == 1`` and returns ``p`` itself (not ``1 - (1 - p)``)
    when the later chances contribute nothing, so ``alpha = 0`` reproduces
    the single-chance threshold bit for bit.
    """
    p = np.asarray(p, dtype=np.float64)
    c = p.copy()
    for w in range(2, int(multiplicity) + 1):
        f = alpha ** (w - 1) * p
        if not np.any(f > 0):
            break
        c = np.where(f > 0, 1.0 - (1.0 - c) * (1.0 - f), c)
    return c


def edge_thresholds(graph, seeds, alpha):
    """Per-edge activation probability given which sources are seeds."""
    q = graph.probs.copy()
    for v, m in seeds.items():
        if m > 1:
            lo, hi = graph.edge_range(v)
            q[lo:hi] = combined_probability(graph.probs[lo:hi], m, alpha)
    return q


def _check_seeds(graph, seeds):
    for v in seeds:
        if not 0 <= v < graph.node_count:
            raise ValueError(f"unknown seed node {v}")


def simulate_once(graph, seeds, alpha, run_rng):
    """One cascade; returns the number of active nodes at quiescence.

    ``run_rng`` is either a :class:`~reselim.rng.RunStream` (one coin per
    edge, matching :func:`estimate_spread` run for run) or a
    ``numpy.random.Generator``.
    """
    seeds = as_multiset(seeds)
    _check_seeds(graph, seeds)
    if isinstance(run_rng, np.random.Generator):
        coin = lambda e: run_rng.random()  # noqa: E731
    else:
        coin = run_rng.uniform
    q = edge_thresholds(graph, seeds, alpha)
    active = np.zeros(graph.node_count, dtype=bool)
    frontier = list(seeds)
    active[frontier] = True
    count = len(frontier)
    indptr, targets = graph.indptr, graph.targets
    while frontier:
        nxt = []
        for u in frontier:
            for e in range(indptr[u], indptr[u + 1]):
                v = targets[e]
                if active[v]:
                    continue
                if coin(e) < q[e]:
                    active[v] = True
                    nxt.append(v)
                    count += 1
        frontier = nxt
    return count


def _batch_counts(graph, seeds, q, master_seed, run_lo, run_hi):
    n = graph.node_count
    b = run_hi - run_lo
    rkeys = _rng.run_keys(master_seed, np.arange(run_lo, run_hi))
    visited = np.zeros(b * n, dtype=bool)
    seed_ids = np.fromiter(seeds, dtype=np.int64, count=len(seeds))
    f_run = np.repeat(np.arange(b, dtype=np.int64), len(seed_ids))
    f_node = np.tile(seed_ids, b)
    visited[f_run * n + f_node] = True
    indptr, targets = graph.indptr, graph.targets
    deg_all = np.diff(indptr)
    while len(f_node):
        deg = deg_all[f_node]
        total = int(deg.sum())
        if total == 0:
            break
        offsets = np.repeat(indptr[f_node] - (np.cumsum(deg) - deg), deg)
        edges = np.arange(total, dtype=np.int64) + offsets
        runs = np.repeat(f_run, deg)
        cells = runs * n + targets[edges]
        open_ = ~visited[cells]
        edges, runs, cells = edges[open_], runs[open_], cells[open_]
        u = _rng.uniforms(rkeys[runs], _rng.edge_keys(edges))
        hit = np.unique(cells[u < q[edges]])
        visited[hit] = True
        f_run, f_node = np.divmod(hit, n)
    return visited.reshape(b, n).sum(axis=1)


def spread_counts(graph, seeds, alpha, runs, master_seed, workers=1):
    """Activated-node count of every run ``0 .. runs-1``."""
    seeds = as_multiset(seeds)
    _check_seeds(graph, seeds)
    if not seeds:
        return np.zeros(runs, dtype=np.int64)
    q = edge_thresholds(graph, seeds, alpha)
    step = max(1, min(runs, _BATCH_CELLS // max(graph.node_count, 1)))
    if workers > 1:
        step = max(1, min(step, math.ceil(runs / workers)))
    bounds = [(lo, min(lo + step, runs)) for lo in range(0, runs, step)]
    job = lambda lh: _batch_counts(graph, seeds, q, master_seed, *lh)  # noqa: E731
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]
    return np.concatenate(parts).astype(np.int64)


def summarize(counts):
    """Mean and standard error from integer counts, computed exactly."""
    r = len(counts)
    s1 = int(np.sum(counts, dtype=np.int64))
    s2 = int(np.sum(np.asarray(counts, dtype=np.int64) ** 2))
    mean = s1 / r
    if r < 2:
        return SpreadEstimate(mean, 0.0, r)
    var_num = r * s2 - s1 * s1  # exact integer
    se = math.sqrt(var_num / (r * r * (r - 1))) if var_num > 0 else 0.0
    return SpreadEstimate(mean, se, r)


def estimate_spread(graph, seeds, cfg, return_counts=False):
    """Monte Carlo estimate of the expected spread of a seed multiset."""
    counts = spread_counts(graph, seeds, cfg.alpha, cfg.runs, cfg.master_seed, cfg.workers)
    est = summarize(counts)
    return (est, counts) if return_counts else est
