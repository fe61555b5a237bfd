"""Lazy greedy seed selection for sets and multisets.

Gains are Monte Carlo differences under a single master seed, so every
candidate is scored on the same random worlds.  In multiset mode a chosen
node stays in the pool and its next copy is scored at the next fading
level.

Cached gains are upper bounds only while the candidate's own multiplicity
is unchanged.  A node's first selection can gain less than its second (it
may already be reached by the cascade, while a reselection is a fresh
chance), so a just-selected node is always re-scored before it can win
again.
"""
from dataclasses import dataclass, field, replace
import csv
import heapq
import io
import logging
import math

import numpy as np

from .cascade import SeedMultiset, SpreadEstimate, estimate_spread

log = logging.getLogger(__name__)

SET = "set"
MULTISET = "multiset"
CURVE_COLUMNS = ("k", "node", "multiplicity_after", "spread_mean", "spread_se",
                 "spread_mean_normalized", "spread_mean_raw")
DEFAULT_POOL_THRESHOLD = 50_000
DEFAULT_TOP_DEGREE = 5_000


@dataclass(frozen=True)
class GreedyStep:
    k: int
    node: int
    multiplicity_after: int
    spread: SpreadEstimate  # after monotone clamping
    raw_mean: float


@dataclass
class GreedyCurve:
    mode: str
    alpha: float
    node_count: int
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def tau(self, k):
        if not 1 <= k <= len(self.steps):
            raise ValueError(f"curve has no prefix of size {k} (length {len(self.steps)})")
        return self.steps[k - 1].spread.mean

    @property
    def nodes(self):
        return [s.node for s in self.steps]

    def multiset(self):
        return SeedMultiset(self.nodes)

    def to_csv(self, ids=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for s in self.steps:
            node = int(ids[s.node]) if ids is not None else s.node
            w.writerow([s.k, node, s.multiplicity_after, repr(s.spread.mean),
                        repr(s.spread.std_error), repr(s.spread.mean / self.node_count),
                        repr(s.raw_mean)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, mode, alpha, node_count, runs):
        steps = []
        for row in csv.DictReader(io.StringIO(text)):
            steps.append(GreedyStep(int(row["k"]), int(row["node"]), int(row["multiplicity_after"]),
                                    SpreadEstimate(float(row["spread_mean"]),
                                                   float(row["spread_se"]), runs),
                                    float(row["spread_mean_raw"])))
        return cls(mode, alpha, node_count, steps)


def greedy_select(graph, budget, mode, cfg, spread_fn=None):
    """CELF greedy returning the spread curve of every prefix.

    ``spread_fn(multiset) -> SpreadEstimate`` replaces Monte Carlo
    estimation (tests plug in the exact oracle here).  Ties on the gain go
    to the candidate with the lower current multiplicity, then the smaller
    id; in set mode that is just the smaller id.
    """
    if mode not in (SET, MULTISET):
        raise ValueError(f"unknown mode {mode!r}")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if mode == SET and budget > graph.node_count:
        raise ValueError(f"budget {budget} exceeds node count {graph.node_count} in set mode")
    if spread_fn is None:
        spread_fn = lambda m: estimate_spread(graph, m, cfg)  # noqa: E731

    chosen = SeedMultiset()
    current = 0.0
    curve = GreedyCurve(mode, cfg.alpha, graph.node_count)
    heap = []
    for v in range(graph.node_count):
        est = spread_fn(chosen.add(v))
        heap.append((-(est.mean - current), 0, v, 1, est))
    heapq.heapify(heap)

    for k in range(1, budget + 1):
        while True:
            neg_gain, mult, v, stamp, est = heapq.heappop(heap)
            if stamp == k:
                break
            est = spread_fn(chosen.add(v))
            heapq.heappush(heap, (-(est.mean - current), mult, v, k, est))
        chosen = chosen.add(v)
        raw = est.mean
        prev = curve.steps[-1].spread if curve.steps else None
        if prev is not None and raw < prev.mean:
            est = replace(est, mean=prev.mean)
        current = raw
        curve.steps.append(GreedyStep(k, v, chosen[v], est, raw))
        log.info("greedy %s k=%d node=%d mult=%d spread=%.4f", mode, k, v, chosen[v], est.mean)
        if mode == MULTISET:
            # its old gain is not a bound for the next copy: force a re-score
            heapq.heappush(heap, (-math.inf, chosen[v], v, k, est))
    return curve


@dataclass(frozen=True)
class NodeSpreadRanking:
    entries: tuple  # ((node, SpreadEstimate), ...) by descending mean

    def __len__(self):
        return len(self.entries)

    def spread(self, rank):
        """Spread of the ``rank``-th node, 1-indexed."""
        return self.entries[rank - 1][1].mean

    def to_csv(self, ids=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("rank", "node", "spread_mean", "spread_se"))
        for r, (v, est) in enumerate(self.entries, start=1):
            w.writerow([r, int(ids[v]) if ids is not None else v,
                        repr(est.mean), repr(est.std_error)])
        return buf.getvalue()


def default_pool(graph, threshold=DEFAULT_POOL_THRESHOLD, top_degree=DEFAULT_TOP_DEGREE,
                 extra=()):
    if graph.node_count <= threshold:
        return list(range(graph.node_count))
    deg = graph.out_degree()
    top = np.lexsort((np.arange(graph.node_count), -deg))[:top_degree]
    return sorted(set(int(v) for v in top) | set(int(v) for v in extra))


def single_node_spreads(graph, cfg, pool=None, spread_fn=None):
    if pool is None:
        pool = default_pool(graph)
    pool = list(pool)
    if not pool:
        raise ValueError("empty node pool")
    if spread_fn is None:
        spread_fn = lambda m: estimate_spread(graph, m, cfg)  # noqa: E731
    scored = [(v, spread_fn(SeedMultiset({v: 1}))) for v in pool]
    scored.sort(key=lambda t: (-t[1].mean, t[0]))
    return NodeSpreadRanking(tuple(scored))
