"""Simple undirected graphs with canonical edge indexing.

Edges are stored once as ``(u, v)`` with ``u < v`` and sorted lexicographically,
so edge ``i`` means the same pair in every run. Every bitstring produced by the
optimizers is indexed against this order.
"""
from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

_SPLIT = re.compile(r"[,\s]+")


class EdgeListError(ValueError):
    """Raised for unreadable or malformed edge-list input."""


class Graph:
    """Immutable simple undirected graph.

    Parameters
    ----------
    node_count : int
        Number of nodes; ids are ``0 .. node_count - 1``.
    edges : iterable of pairs
        Node-id pairs. Self-loops are dropped and duplicates or reversed
        copies are merged.
    labels : sequence, optional
        Original identifier of every node (used when writing files).
    """

    def __init__(self, node_count: int, edges: Iterable[Sequence[int]] = (), labels=None):
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise ValueError("edge endpoint out of range")
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if len(arr) else arr
        self._init(int(node_count), arr, labels)

    def _init(self, n, edges, labels):
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        edges.setflags(write=False)
        self.node_count = n
        self.edges = edges
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n:
                raise ValueError("need one label per node")
        self.labels = labels

    @classmethod
    def _from_canonical(cls, n, edges, labels):
        g = cls.__new__(cls)
        g._init(n, edges, labels)
        return g

    def __repr__(self):
        return f"Graph(n={self.node_count}, m={self.edge_count})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self.edges, other.edges)

    __hash__ = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix with sorted column indices."""
        n = self.node_count
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(u), dtype=np.int64)
        mat = sp.csr_matrix((data, (np.r_[u, v], np.r_[v, u])), shape=(n, n))
        mat.sort_indices()
        return mat

    @cached_property
    def _neighbor_sets(self) -> tuple[frozenset, ...]:
        ptr, idx = self.csr.indptr, self.csr.indices
        return tuple(frozenset(idx[ptr[v]:ptr[v + 1]].tolist()) for v in range(self.node_count))

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges.tolist())}

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.node_count)
        deg.setflags(write=False)
        return deg

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of ``v``."""
        ptr = self.csr.indptr
        return self.csr.indices[ptr[v]:ptr[v + 1]]

    def neighbor_set(self, v: int) -> frozenset:
        return self._neighbor_sets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def common_neighbors(self, v: int, w: int) -> set[int]:
        return set(self._neighbor_sets[v] & self._neighbor_sets[w])

    def edge(self, i: int) -> tuple[int, int]:
        u, v = self.edges[i]
        return int(u), int(v)

    def edge_index(self, u: int, v: int) -> int:
        """Index of edge ``{u, v}``; ``KeyError`` if absent."""
        key = (u, v) if u < v else (v, u)
        return self._edge_lookup[key]

    @cached_property
    def triangles(self) -> tuple[np.ndarray, np.ndarray]:
        """All triangles as ``(nodes, edges)`` arrays of shape ``(t, 3)``.

        ``nodes[k]`` is sorted and ``edges[k, j]`` is the index of the edge
        opposite ``nodes[k, j]``, so it joins the other two corners.
        """
        nbrs = self._neighbor_sets
        tri = []
        for u, v in self.edges.tolist():
            for w in nbrs[u] & nbrs[v]:
                if w > v:
                    tri.append((u, v, w))
        nodes = np.array(tri, dtype=np.int64).reshape(-1, 3)
        lookup = self._edge_lookup
        eids = np.array(
            [(lookup[(b, c)], lookup[(a, c)], lookup[(a, b)]) for a, b, c in tri], dtype=np.int64
        ).reshape(-1, 3)
        nodes.setflags(write=False)
        eids.setflags(write=False)
        return nodes, eids

    @cached_property
    def triangle_counts(self) -> np.ndarray:
        nodes, _ = self.triangles
        counts = np.bincount(nodes.ravel(), minlength=self.node_count)
        counts.setflags(write=False)
        return counts

    def triangle_count(self, v: int) -> int:
        return int(self.triangle_counts[v])

    def delete_edges(self, bits) -> "Graph":
        """Graph without the edges whose bit is set; the node set is kept."""
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (self.edge_count,):
            raise ValueError(f"bitstring length {bits.size} != edge count {self.edge_count}")
        return Graph._from_canonical(self.node_count, self.edges[~bits], self.labels)

    def delete_edge_indices(self, indices: Iterable[int]) -> "Graph":
        bits = np.zeros(self.edge_count, dtype=bool)
        bits[np.fromiter(indices, dtype=np.int64)] = True
        return self.delete_edges(bits)

    def label(self, v: int):
        return v if self.labels is None else self.labels[v]


def degree(g: Graph, v: int) -> int:
    return g.degree(v)


def common_neighbors(g: Graph, v: int, w: int) -> set[int]:
    return g.common_neighbors(v, w)


def triangle_count(g: Graph, v: int) -> int:
    return g.triangle_count(v)


def delete_edges(g: Graph, bits) -> Graph:
    return g.delete_edges(bits)


# --------------------------------------------------------------------------- io

def load_edge_list(source) -> Graph:
    """Read a whitespace- or comma-separated edge list.

    ``source`` may be a path, a binary/text stream, or raw bytes. Node tokens
    are arbitrary strings, numbered densely in first-seen order. Columns past
    the second (weights, timestamps) are ignored, as are lines starting with
    ``#`` or ``%``.
    """
    if isinstance(source, (bytes, bytearray)):
        stream: IO = io.BytesIO(source)
    elif isinstance(source, (str, os.PathLike)):
        try:
            stream = open(source, "rb")
        except OSError as exc:
            raise EdgeListError(f"cannot read edge list {source}: {exc}") from exc
    else:
        stream = source

    ids: dict[str, int] = {}
    pairs = []
    seen_data = False
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
            line = line.strip()
            if not line or line[0] in "#%":
                continue
            seen_data = True
            tokens = [t for t in _SPLIT.split(line) if t]
            if len(tokens) < 2:
                raise EdgeListError(f"line {lineno}: expected at least two node ids, got {line!r}")
            a = ids.setdefault(tokens[0], len(ids))
            b = ids.setdefault(tokens[1], len(ids))
            pairs.append((a, b))
    finally:
        if isinstance(source, (str, os.PathLike)):
            stream.close()
    if not seen_data:
        raise EdgeListError("empty edge list")
    return Graph(len(ids), pairs, labels=list(ids))


def write_id_map(g: Graph, target) -> None:
    """Write ``original-id internal-index`` pairs, one per line."""
    with open(target, "w", encoding="utf-8") as fh:
        for v in range(g.node_count):
            fh.write(f"{g.label(v)} {v}\n")


# ------------------------------------------------------------------ structure

@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def largest(self) -> int:
        return int(self.sizes.max()) if len(self.sizes) else 0

    @property
    def largest_fraction(self) -> float:
        n = len(self.labels)
        return self.largest / n if n else 0.0


def connected_components(g: Graph) -> ComponentLabeling:
    count, labels = csgraph.connected_components(g.csr, directed=False)
    return ComponentLabeling(labels=labels, sizes=np.bincount(labels, minlength=count))


def lcc_fraction(g: Graph) -> float:
    return connected_components(g).largest_fraction


def local_clustering(g: Graph, v: int) -> float:
    d = g.degree(v)
    if d < 2:
        return 0.0
    return g.triangle_count(v) / (d * (d - 1) / 2)


def clustering_coefficients(g: Graph) -> np.ndarray:
    deg = g.degrees.astype(np.float64)
    pairs = deg * (deg - 1) / 2
    out = np.zeros(g.node_count)
    np.divide(g.triangle_counts, pairs, out=out, where=pairs > 0)
    return out


def average_clustering(g: Graph) -> float:
    if g.node_count == 0:
        raise ValueError("average clustering of an empty graph")
    return float(clustering_coefficients(g).mean())


def _distance_stats(g: Graph, chunk: int = 256) -> tuple[int, int, int]:
    """(sum of finite distances, number of finite pairs, diameter) over ordered pairs."""
    total = pairs = diam = 0
    n = g.node_count
    for start in range(0, n, chunk):
        src = np.arange(start, min(n, start + chunk))
        dist = csgraph.shortest_path(g.csr, directed=False, unweighted=True, indices=src)
        finite = np.isfinite(dist) & (dist > 0)
        vals = dist[finite].astype(np.int64)
        total += int(vals.sum())
        pairs += int(finite.sum())
        if vals.size:
            diam = max(diam, int(vals.max()))
    return total, pairs, diam


def average_distance(g: Graph) -> float:
    """Mean shortest-path length over connected unordered node pairs."""
    total, pairs, _ = _distance_stats(g)
    if pairs == 0:
        raise ValueError("no connected node pairs")
    return total / pairs


def diameter(g: Graph) -> int:
    return _distance_stats(g)[2]
