"""Exact expected spread by enumerating live-edge outcomes.

Two routes are provided.  :func:`exact_spread` goes through the copy graph:
each extra chance of a seed becomes a zero in-degree copy with faded
out-edges, the set spread on that host graph is enumerated, and the copies
are subtracted back out.  :func:`exact_spread_direct` enumerates on the
original graph with the seeds' combined edge probabilities.  They must
agree to floating-point accuracy.
"""
from dataclasses import dataclass
import math

import numpy as np

from .cascade import as_multiset, edge_thresholds, _check_seeds
from .graph import copy_expand

DEFAULT_GUARD = 25
_CHUNK_BITS = 17


class OracleTooLarge(ValueError):
    def __init__(self, edge_count, guard):
        super().__init__(f"too large for exact oracle: {edge_count} reachable edges "
                         f"(limit {guard})")
        self.edge_count = edge_count
        self.guard = guard


@dataclass(frozen=True)
class ExactResult:
    spread: float
    host_spread: float  # set spread of the underlying set on the copy graph
    mset_size: int
    unique_count: int


def _relevant_edges(graph, seed_nodes, q):
    """Edges that can matter: source reachable from the seeds, target not a seed."""
    is_seed = np.zeros(graph.node_count, dtype=bool)
    is_seed[list(seed_nodes)] = True
    seen = is_seed.copy()
    order = list(seed_nodes)
    edges = []
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for e in range(graph.indptr[u], graph.indptr[u + 1]):
            v = int(graph.targets[e])
            if q[e] <= 0 or is_seed[v]:
                continue
            edges.append(e)
            if not seen[v]:
                seen[v] = True
                order.append(v)
    return order, edges


def exact_set_spread(graph, seed_nodes, q=None, guard=DEFAULT_GUARD):
    """Expected number of nodes reachable from ``seed_nodes``.

    ``q`` overrides the per-edge live probabilities (defaults to the graph's).
    """
    seed_nodes = sorted({int(v) for v in seed_nodes})
    if not seed_nodes:
        return 0.0
    q = graph.probs if q is None else np.asarray(q, dtype=np.float64)
    nodes, edges = _relevant_edges(graph, seed_nodes, q)
    if len(edges) > guard:
        raise OracleTooLarge(len(edges), guard)
    local = {v: i for i, v in enumerate(nodes)}
    src = [local[int(graph.sources[e])] for e in edges]
    dst = [local[int(graph.targets[e])] for e in edges]
    qe = np.array([q[e] for e in edges], dtype=np.float64)
    uncertain = [j for j in range(len(edges)) if qe[j] < 1.0]
    n_unc = len(uncertain)
    col = {j: c for c, j in enumerate(uncertain)}
    total_outcomes = 1 << n_unc
    chunk = min(total_outcomes, 1 << _CHUNK_BITS)
    shifts = np.arange(n_unc, dtype=np.int64)
    partial = []
    for lo in range(0, total_outcomes, chunk):
        idx = np.arange(lo, lo + chunk, dtype=np.int64)
        live = ((idx[:, None] >> shifts) & 1).astype(bool)
        pu = qe[uncertain]
        weight = np.prod(np.where(live, pu, 1.0 - pu), axis=1)
        active = np.zeros((chunk, len(nodes)), dtype=bool)
        active[:, :len(seed_nodes)] = True
        changed = True
        while changed:
            changed = False
            for j, (s, t) in enumerate(zip(src, dst)):
                reach = active[:, s] if j not in col else active[:, s] & live[:, col[j]]
                new = reach & ~active[:, t]
                if new.any():
                    active[:, t] |= new
                    changed = True
        partial.append(float(np.dot(weight, active.sum(axis=1))))
    return math.fsum(partial)


def reachable_edge_count(graph, seeds, alpha, guard=DEFAULT_GUARD):
    """Size of the copy-graph enumeration for ``seeds``; raises past ``guard``."""
    seeds = as_multiset(seeds)
    needed = {v: m - 1 for v, m in seeds.items() if m > 1}
    cg = copy_expand(graph, alpha, needed)
    mset = list(seeds) + [c for ids in cg.copies.values() for c in ids]
    n = len(_relevant_edges(cg.host, mset, cg.host.probs)[1])
    if n > guard:
        raise OracleTooLarge(n, guard)
    return n


def exact_decomposition(graph, seeds, alpha, guard=DEFAULT_GUARD):
    """Multiset spread via the copy graph, with the pieces of the identity."""
    seeds = as_multiset(seeds)
    _check_seeds(graph, seeds)
    if not seeds:
        return ExactResult(0.0, 0.0, 0, 0)
    needed = {v: m - 1 for v, m in seeds.items() if m > 1}
    cg = copy_expand(graph, alpha, needed)
    mset = list(seeds) + [c for ids in cg.copies.values() for c in ids]
    host = exact_set_spread(cg.host, mset, guard=guard)
    return ExactResult(host - len(mset) + seeds.unique_count, host, len(mset), seeds.unique_count)


def exact_spread(graph, seeds, alpha, guard=DEFAULT_GUARD):
    return exact_decomposition(graph, seeds, alpha, guard).spread


def exact_spread_direct(graph, seeds, alpha, guard=DEFAULT_GUARD):
    """Multiset spread enumerated on ``graph`` with combined seed probabilities."""
    seeds = as_multiset(seeds)
    _check_seeds(graph, seeds)
    return exact_set_spread(graph, list(seeds), edge_thresholds(graph, seeds, alpha), guard)
