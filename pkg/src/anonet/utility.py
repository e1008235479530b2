"""How much an anonymized graph still resembles the original.

Six numbers are reported: fraction of edges deleted, change in average
clustering, change in average distance, change in the largest-component
fraction, overlap of the top-100 betweenness nodes, and the NMI between
consensus community partitions.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .graph import Graph, average_clustering, average_distance, lcc_fraction


def betweenness(g: Graph, batch: int = 64) -> np.ndarray:
    """Exact unnormalised betweenness, counting each unordered pair once.

    Brandes' accumulation, run level-synchronously for a block of sources at
    a time so each BFS level is one sparse product.
    """
    n = g.node_count
    adj = g.csr.astype(np.float64)
    total = np.zeros(n)
    for start in range(0, n, batch):
        src = np.arange(start, min(n, start + batch))
        rows = np.arange(len(src))
        sigma = np.zeros((len(src), n))
        sigma[rows, src] = 1.0
        seen = np.zeros((len(src), n), dtype=bool)
        seen[rows, src] = True
        levels = [seen.copy()]
        frontier = sigma.copy()
        while True:
            reach = np.asarray(frontier @ adj)
            new = (reach > 0) & ~seen
            if not new.any():
                break
            sigma[new] = reach[new]
            seen |= new
            levels.append(new)
            frontier = np.where(new, sigma, 0.0)
        delta = np.zeros_like(sigma)
        for depth in range(len(levels) - 1, 0, -1):
            here = levels[depth]
            coeff = np.zeros_like(sigma)
            coeff[here] = (1.0 + delta[here]) / sigma[here]
            back = np.asarray(coeff @ adj)
            prev = levels[depth - 1]
            delta[prev] += sigma[prev] * back[prev]
        delta[rows, src] = 0.0
        total += delta.sum(axis=0)
    return total / 2.0


def topk_overlap(a, b, k: int = 100) -> float:
    """Share of the ``k`` highest-scoring nodes common to both score vectors."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("score vectors cover different node sets")
    k = min(k, a.size)
    if k == 0:
        return 1.0
    ids = np.arange(a.size)
    top_a = set(np.lexsort((ids, -a))[:k].tolist())
    top_b = set(np.lexsort((ids, -b))[:k].tolist())
    return len(top_a & top_b) / k


# --------------------------------------------------------------- communities

def canonical(labels) -> np.ndarray:
    """Relabel communities densely in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse.ravel()]


def _to_networkx(n: int, edges, weights=None) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(n))
    if weights is None:
        G.add_edges_from(map(tuple, edges))
    else:
        G.add_weighted_edges_from((int(u), int(v), float(w)) for (u, v), w in zip(edges, weights))
    return G


def _louvain_nx(G: nx.Graph, rng) -> np.ndarray:
    n = G.number_of_nodes()
    if G.number_of_edges() == 0:
        return np.arange(n)
    seed = int(rng.integers(2**31 - 1))
    labels = np.empty(n, dtype=np.int64)
    for k, block in enumerate(nx.community.louvain_communities(G, weight="weight", seed=seed)):
        labels[list(block)] = k
    return canonical(labels)


def louvain(g: Graph, rng) -> np.ndarray:
    """Louvain modularity partition; node order is shuffled from ``rng``."""
    return _louvain_nx(_to_networkx(g.node_count, g.edges.tolist()), rng)


def coassignment(partitions) -> sp.csr_matrix:
    """Fraction of partitions placing each node pair together (sparse)."""
    parts = [np.asarray(p) for p in partitions]
    n = parts[0].size
    acc = sp.csr_matrix((n, n))
    for p in parts:
        h = sp.csr_matrix((np.ones(n), (np.arange(n), p)), shape=(n, int(p.max()) + 1))
        acc = acc + h @ h.T
    return acc / len(parts)


def _same(parts) -> bool:
    first = parts[0]
    return all(np.array_equal(first, p) for p in parts[1:])


def consensus_partition(g: Graph, runs: int, rng, threshold: float = 0.5,
                        max_iter: int = 10) -> np.ndarray:
    """Consensus clustering over repeated Louvain runs.

    Pairs co-clustered in at least ``threshold`` of the runs form a weighted
    agreement graph, which is clustered ``runs`` times again; this repeats
    until all runs agree or ``max_iter`` rounds have passed, after which the
    most frequent partition is returned.
    """
    if runs < 1:
        raise ValueError("need at least one run")
    n = g.node_count
    parts = [louvain(g, rng) for _ in range(runs)]
    for _ in range(max_iter):
        if _same(parts):
            return parts[0]
        agree = sp.triu(coassignment(parts), k=1).tocoo()
        keep = agree.data >= threshold
        edges = np.column_stack([agree.row[keep], agree.col[keep]])
        G = _to_networkx(n, edges, agree.data[keep])
        parts = [_louvain_nx(G, rng) for _ in range(runs)]
    if _same(parts):
        return parts[0]
    counts = Counter(p.tobytes() for p in parts)
    modal = max(counts, key=lambda key: counts[key])
    return next(p for p in parts if p.tobytes() == modal)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(p, q) -> float:
    """Normalised mutual information, ``2 I(p; q) / (H(p) + H(q))``."""
    p, q = np.asarray(p), np.asarray(q)
    if p.shape != q.shape:
        raise ValueError("partitions cover different node sets")
    n = p.size
    if n == 0:
        return 1.0
    _, pi = np.unique(p, return_inverse=True)
    _, qi = np.unique(q, return_inverse=True)
    pi, qi = pi.ravel(), qi.ravel()
    hp = _entropy(np.bincount(pi), n)
    hq = _entropy(np.bincount(qi), n)
    if hp == 0 and hq == 0:
        return 1.0
    joint = np.bincount(pi * (qi.max() + 1) + qi)
    mi = hp + hq - _entropy(joint, n)
    return float(min(1.0, max(0.0, 2 * mi / (hp + hq))))


# --------------------------------------------------------------------- report

@dataclass(frozen=True)
class UtilityReport:
    """Signed changes are ``anonymized - original``."""

    frac_deleted: float
    delta_clustering: float
    delta_avg_distance: float
    delta_lcc_frac: float
    betweenness_top100_overlap: float
    community_nmi: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityReport":
        return cls(**{k: float(d[k]) for k in cls.__dataclass_fields__})


def _avg_distance_or_nan(g: Graph) -> float:
    try:
        return average_distance(g)
    except ValueError:
        return math.nan


def _as_bits(g: Graph, deleted) -> np.ndarray:
    arr = np.asarray(deleted)
    if arr.dtype == bool:
        if arr.shape != (g.edge_count,):
            raise ValueError("bitstring length does not match edge count")
        return arr
    idx = np.asarray(list(deleted), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.edge_count):
        raise ValueError("deleted edge index out of range")
    bits = np.zeros(g.edge_count, dtype=bool)
    bits[idx] = True
    return bits


def utility_report(g: Graph, deleted, seed: int = 0, louvain_runs: int = 100,
                   top_k: int = 100) -> UtilityReport:
    """Compare ``g`` with ``g`` minus ``deleted`` (edge indices or a bitstring)."""
    bits = _as_bits(g, deleted)
    h = g.delete_edges(bits)
    # same random stream for both graphs, so equal graphs get equal partitions
    before = consensus_partition(g, louvain_runs, np.random.default_rng(seed))
    after = consensus_partition(h, louvain_runs, np.random.default_rng(seed))
    return UtilityReport(
        frac_deleted=float(bits.sum()) / g.edge_count,
        delta_clustering=average_clustering(h) - average_clustering(g),
        delta_avg_distance=_avg_distance_or_nan(h) - _avg_distance_or_nan(g),
        delta_lcc_frac=lcc_fraction(h) - lcc_fraction(g),
        betweenness_top100_overlap=topk_overlap(betweenness(g), betweenness(h), top_k),
        community_nmi=nmi(before, after),
    )
