"""Graph construction: edge-list ingestion, edge weighting and generators.

Node ids are dense integers in ``[0, node_count)``.  Weighted graphs are
stored in CSR form (``indptr``/``targets``/``probs``) sorted by source and
then target, so edge ``e`` has a stable integer id that the Monte Carlo
engine uses to index its random stream.
"""
from dataclasses import dataclass, field
import hashlib

import numpy as np

TR_VALUES = (0.1, 0.01, 0.001)


class ParseError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _canonical(src, dst, node_count=None):
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    if node_count is None:
        node_count = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
    if len(src):
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        first = np.ones(len(src), dtype=bool)
        first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst = src[first], dst[first]
    return int(node_count), src, dst


@dataclass(frozen=True, eq=False)
class RawGraph:
    node_count: int
    edges: np.ndarray  # (E, 2) int64, sorted, unique, no self-loops

    @classmethod
    def from_pairs(cls, pairs, node_count=None):
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        n, src, dst = _canonical(arr[:, 0], arr[:, 1], node_count)
        return cls(n, np.stack([src, dst], axis=1))

    @property
    def edge_count(self):
        return len(self.edges)

    def edge_set(self):
        return {(int(u), int(v)) for u, v in self.edges}

    def in_degree(self):
        return np.bincount(self.edges[:, 1], minlength=self.node_count)

    def __eq__(self, other):
        if not isinstance(other, RawGraph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self.edges, other.edges)

    def __repr__(self):
        return f"RawGraph(node_count={self.node_count}, edges={self.edge_count})"


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    node_count: int
    indptr: np.ndarray
    targets: np.ndarray
    probs: np.ndarray
    sources: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, node_count, src, dst, probs):
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        probs = np.asarray(probs, dtype=np.float64)
        if len(probs) and (probs.min() < 0 or probs.max() > 1 or np.isnan(probs).any()):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if len(src) and (src == dst).any():
            raise ValueError("self-loops are not allowed")
        order = np.lexsort((dst, src))
        src, dst, probs = src[order], dst[order], probs[order]
        if len(src) > 1 and ((src[1:] == src[:-1]) & (dst[1:] == dst[:-1])).any():
            raise ValueError("duplicate directed edge")
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=node_count), out=indptr[1:])
        for a in (src, dst, probs, indptr):
            a.setflags(write=False)
        return cls(int(node_count), indptr, dst, probs, src)

    @property
    def edge_count(self):
        return len(self.targets)

    def out_degree(self):
        return np.diff(self.indptr)

    def in_degree(self):
        return np.bincount(self.targets, minlength=self.node_count)

    def out_edges(self, v):
        """List of ``(target, probability)`` pairs leaving ``v``."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return [(int(t), float(p)) for t, p in zip(self.targets[lo:hi], self.probs[lo:hi])]

    def edge_range(self, v):
        return int(self.indptr[v]), int(self.indptr[v + 1])

    def triples(self):
        return [(int(u), int(v), float(p)) for u, v, p in zip(self.sources, self.targets, self.probs)]

    def structure(self):
        return RawGraph(self.node_count, np.stack([self.sources, self.targets], axis=1))

    def digest(self):
        """Content hash of structure and weights."""
        h = hashlib.sha256()
        h.update(np.int64(self.node_count).tobytes())
        for a in (self.sources, self.targets, self.probs):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.sources, other.sources)
                and np.array_equal(self.targets, other.targets)
                and np.array_equal(self.probs, other.probs))

    def __repr__(self):
        return f"WeightedGraph(node_count={self.node_count}, edges={self.edge_count})"


@dataclass(frozen=True)
class CopyGraph:
    """A graph extended with zero in-degree, faded copies of some nodes.

    ``copies[v]`` lists the host ids of ``v_1 .. v_m``; copy ``v_i`` has the
    out-edges of ``v`` with probabilities scaled by ``alpha ** i``.
    """
    base: WeightedGraph
    host: WeightedGraph
    copies: dict


# -- ingestion ---------------------------------------------------------------

def _rows(text, ncols):
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != ncols:
            raise ParseError(lineno, f"expected {ncols} fields, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(lineno, f"non-integer node id in {s!r}") from None
        if u < 0 or v < 0:
            raise ParseError(lineno, "negative node id")
        if ncols == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"bad probability {parts[2]!r}") from None
            if not 0.0 <= p <= 1.0:
                raise ParseError(lineno, f"probability {p} outside [0, 1]")
            out.append((lineno, u, v, p))
        else:
            out.append((lineno, u, v))
    return out


def _check_count(node_count, max_id):
    if node_count is not None and max_id >= node_count:
        raise ParseError(0, f"node id {max_id} not below declared node count {node_count}")


def parse_edge_list(text, node_count=None):
    """Parse a SNAP edge list (``u v`` per line, ``#`` comments).

    Self-loops are dropped and duplicate lines collapsed.  ``node_count``
    may be given to include isolated trailing ids.
    """
    rows = _rows(text, 2)
    src = [r[1] for r in rows]
    dst = [r[2] for r in rows]
    _check_count(node_count, max(src + dst, default=-1))
    n, s, d = _canonical(src, dst, node_count)
    return RawGraph(n, np.stack([s, d], axis=1))


def parse_weighted_edge_list(text, node_count=None):
    """Parse ``u v p`` lines.  Repeated pairs must carry the same probability."""
    rows = _rows(text, 3)
    seen = {}
    for lineno, u, v, p in rows:
        if u == v:
            continue
        if (u, v) in seen and seen[(u, v)] != p:
            raise ParseError(lineno, f"conflicting probability for edge ({u}, {v})")
        seen[(u, v)] = p
    ids = [x for pair in seen for x in pair]
    _check_count(node_count, max(ids, default=-1))
    n = node_count if node_count is not None else max(ids, default=-1) + 1
    src = [u for u, _ in seen]
    dst = [v for _, v in seen]
    return WeightedGraph.from_edges(n, src, dst, list(seen.values()))


def sniff_columns(text):
    """Number of fields on the first data line (2 or 3), or 2 for empty input."""
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            return len(s.split())
    return 2


def compact_ids(graph):
    """Relabel a graph whose id space has gaps onto ``[0, n)``.

    Returns ``(graph, original_ids)`` where ``original_ids[internal]`` is the
    id from the file.  Relabelling preserves id order.
    """
    if isinstance(graph, RawGraph):
        src, dst = graph.edges[:, 0], graph.edges[:, 1]
    else:
        src, dst = graph.sources, graph.targets
    ids = np.unique(np.concatenate([src, dst]))
    if len(ids) == graph.node_count:
        return graph, np.arange(graph.node_count, dtype=np.int64)
    s, d = np.searchsorted(ids, src), np.searchsorted(ids, dst)
    if isinstance(graph, RawGraph):
        return RawGraph(len(ids), np.stack([s, d], axis=1)), ids
    return WeightedGraph.from_edges(len(ids), s, d, graph.probs), ids


def format_edge_list(graph):
    return "".join(f"{u} {v}\n" for u, v in graph.edges)


def format_weighted(graph, ids=None):
    lines = []
    for u, v, p in graph.triples():
        if ids is not None:
            u, v = int(ids[u]), int(ids[v])
        lines.append(f"{u} {v} {p!r}\n")
    return "".join(lines)


def format_id_table(ids):
    return "original_id,internal_id\n" + "".join(f"{int(o)},{i}\n" for i, o in enumerate(ids))


# -- transforms --------------------------------------------------------------

def symmetrize(graph):
    """Add the reverse of every edge."""
    e = graph.edges
    n, s, d = _canonical(np.concatenate([e[:, 0], e[:, 1]]),
                         np.concatenate([e[:, 1], e[:, 0]]), graph.node_count)
    return RawGraph(n, np.stack([s, d], axis=1))


def assign_wc(graph):
    """Weighted cascade: every in-edge of ``v`` gets ``1 / indeg(v)``."""
    indeg = graph.in_degree()
    dst = graph.edges[:, 1]
    probs = 1.0 / indeg[dst] if len(dst) else np.zeros(0)
    return WeightedGraph.from_edges(graph.node_count, graph.edges[:, 0], dst, probs)


def assign_tr(graph, seed):
    """Trivalency: each directed edge draws uniformly from {0.1, 0.01, 0.001}."""
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(TR_VALUES), size=graph.edge_count)
    probs = np.asarray(TR_VALUES)[picks]
    return WeightedGraph.from_edges(graph.node_count, graph.edges[:, 0], graph.edges[:, 1], probs)


def assign_uniform(graph, p):
    return WeightedGraph.from_edges(graph.node_count, graph.edges[:, 0], graph.edges[:, 1],
                                    np.full(graph.edge_count, float(p)))


# -- generators --------------------------------------------------------------

def gen_star(n_leaves, p):
    """Core node 0 with an edge of probability ``p`` to each of ``1..n_leaves``."""
    if n_leaves < 1:
        raise ValueError("a star needs at least one leaf")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    leaves = np.arange(1, n_leaves + 1)
    return WeightedGraph.from_edges(n_leaves + 1, np.zeros(n_leaves, dtype=np.int64), leaves,
                                    np.full(n_leaves, float(p)))


def gen_random(n, edge_prob, p, seed):
    """Directed G(n, edge_prob) with every edge weighted ``p``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not (0.0 <= edge_prob <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < edge_prob
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return WeightedGraph.from_edges(n, src, dst, np.full(len(src), float(p)))


def gen_clique(n, p):
    return gen_random(n, 1.0, p, 0)


def copy_expand(graph, alpha, needed):
    """Append faded copies ``v_1 .. v_m`` for each ``v: m`` in ``needed``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    src = [graph.sources]
    dst = [graph.targets]
    probs = [graph.probs]
    copies = {}
    nxt = graph.node_count
    for v in sorted(needed):
        m = int(needed[v])
        if m < 1:
            raise ValueError(f"copy count for node {v} must be at least 1")
        lo, hi = graph.edge_range(v)
        ids = []
        for i in range(1, m + 1):
            src.append(np.full(hi - lo, nxt, dtype=np.int64))
            dst.append(graph.targets[lo:hi])
            probs.append(graph.probs[lo:hi] * alpha ** i)
            ids.append(nxt)
            nxt += 1
        copies[int(v)] = tuple(ids)
    host = WeightedGraph.from_edges(nxt, np.concatenate(src), np.concatenate(dst),
                                    np.concatenate(probs))
    return CopyGraph(graph, host, copies)
