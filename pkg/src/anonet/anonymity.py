"""Structural uniqueness under the degree/triangle-count equivalence.

Two nodes are equivalent when they have the same degree and sit in the same
number of triangles. A node whose ``(degree, triangles)`` state no other node
shares is *unique*; an edge touching a unique node is a unique edge.

Two engines compute the same quantities:

* :class:`AnonymityView` keeps per-node states and the state census up to date
  one edge deletion at a time (used by the greedy baselines).
* :class:`UniquenessEvaluator` scores a whole deletion bitstring in a few
  vectorised passes over a precomputed triangle table (used by the GA).
"""
from __future__ import annotations

from collections import Counter
from typing import NamedTuple

import numpy as np

from .graph import Graph


class NodeState(NamedTuple):
    degree: int
    triangles: int


def node_state(g: Graph, v: int) -> NodeState:
    return NodeState(g.degree(v), g.triangle_count(v))


class AnonymityView:
    """Node states, state census and unique-node set of a graph with deletions.

    The view owns a mutable copy of the adjacency so that common neighbours
    always reflect the current derived graph. Build it with :func:`build_view`
    and use :meth:`copy` before mutating a shared baseline.
    """

    def __init__(self, g: Graph):
        self.graph = g
        self.degree = g.degrees.tolist()
        self.triangles = g.triangle_counts.tolist()
        self._holders: dict[tuple[int, int], set[int]] = {}
        for v, s in enumerate(zip(self.degree, self.triangles)):
            self._holders.setdefault(s, set()).add(v)
        self.unique = {next(iter(h)) for h in self._holders.values() if len(h) == 1}
        self.deleted: set[int] = set()
        self._adj = [set(s) for s in g._neighbor_sets]

    def copy(self) -> "AnonymityView":
        other = AnonymityView.__new__(AnonymityView)
        other.graph = self.graph
        other.degree = list(self.degree)
        other.triangles = list(self.triangles)
        other._holders = {s: set(h) for s, h in self._holders.items()}
        other.unique = set(self.unique)
        other.deleted = set(self.deleted)
        other._adj = [set(s) for s in self._adj]
        return other

    @property
    def node_count(self) -> int:
        return len(self.degree)

    def state(self, v: int) -> NodeState:
        return NodeState(self.degree[v], self.triangles[v])

    @property
    def states(self) -> list[NodeState]:
        return [NodeState(d, t) for d, t in zip(self.degree, self.triangles)]

    @property
    def census(self) -> Counter:
        """Multiplicity of every occupied state."""
        return Counter({NodeState(*s): len(h) for s, h in self._holders.items()})

    @property
    def unique_count(self) -> int:
        return len(self.unique)

    def uniqueness(self) -> float:
        return len(self.unique) / self.node_count

    def neighbors(self, v: int) -> set[int]:
        return self._adj[v]

    def common_neighbors(self, v: int, w: int) -> set[int]:
        return self._adj[v] & self._adj[w]

    def unique_edges(self) -> set[int]:
        """Indices of surviving edges with at least one unique endpoint."""
        g = self.graph
        return {g.edge_index(v, w) for v in self.unique for w in self._adj[v]}

    def _move(self, u: int, old: tuple[int, int], new: tuple[int, int]) -> None:
        holders = self._holders
        h = holders[old]
        h.discard(u)
        self.unique.discard(u)
        if not h:
            del holders[old]
        elif len(h) == 1:
            self.unique.add(next(iter(h)))
        h = holders.setdefault(new, set())
        h.add(u)
        if len(h) == 1:
            self.unique.add(u)
        elif len(h) == 2:
            self.unique.difference_update(h)

    def delete_edge(self, e: int) -> list[int]:
        """Remove edge ``e`` in place; returns the nodes whose state changed."""
        if e in self.deleted:
            raise ValueError(f"edge {e} already deleted")
        v, w = self.graph.edge(e)
        adj = self._adj
        common = adj[v] & adj[w]
        adj[v].discard(w)
        adj[w].discard(v)
        self.deleted.add(e)
        k = len(common)
        deg, tri = self.degree, self.triangles
        for u, dd, dt in [(v, 1, k), (w, 1, k), *((u, 0, 1) for u in common)]:
            old = (deg[u], tri[u])
            deg[u] -= dd
            tri[u] -= dt
            self._move(u, old, (deg[u], tri[u]))
        return [v, w, *common]


def build_view(g: Graph) -> AnonymityView:
    return AnonymityView(g)


def uniqueness(view: AnonymityView) -> float:
    return view.uniqueness()


def unique_edges(g: Graph, view: AnonymityView) -> set[int]:
    if view.graph is not g and view.graph != g:
        raise ValueError("view was built for a different graph")
    return view.unique_edges()


def delete_edge_delta(view: AnonymityView, g: Graph, e: int) -> AnonymityView:
    """Apply the deletion of edge ``e`` to ``view`` (in place) and return it."""
    if view.graph is not g and view.graph != g:
        raise ValueError("view was built for a different graph")
    view.delete_edge(e)
    return view


def unique_mask_from_states(degree: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Boolean mask of nodes whose (degree, triangles) pair occurs once."""
    key = degree.astype(np.int64) * (np.int64(triangles.max(initial=0)) + 1) + triangles
    _, inverse, counts = np.unique(key, return_inverse=True, return_counts=True)
    return counts[inverse.ravel()] == 1


class UniquenessEvaluator:
    """Scores deletion bitstrings against a fixed base graph.

    Degrees after deletion come from endpoint counts of the deleted edges; a
    triangle survives iff none of its three edges is deleted, so triangle
    counts follow from the set of triangles touched by deleted edges.
    """

    def __init__(self, g: Graph):
        self.graph = g
        self.n = g.node_count
        self.m = g.edge_count
        self.deg0 = g.degrees.astype(np.int64)
        self.tri0 = g.triangle_counts.astype(np.int64)
        tri_nodes, tri_edges = g.triangles
        self.tri_nodes = tri_nodes
        # edge -> incident triangle ids, CSR layout
        flat = tri_edges.ravel()
        order = np.argsort(flat, kind="stable")
        self._tri_of_edge = (order // 3).astype(np.int64)
        self._ptr = np.zeros(self.m + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=self.m), out=self._ptr[1:])
        self._endpoints = g.edges

    def _triangles_of(self, eids: np.ndarray) -> np.ndarray:
        starts = self._ptr[eids]
        lens = self._ptr[eids + 1] - starts
        total = int(lens.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        offs = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
        return self._tri_of_edge[offs]

    def states(self, bits) -> tuple[np.ndarray, np.ndarray]:
        """Per-node degree and triangle count of the derived graph."""
        eids = np.flatnonzero(bits)
        if eids.size == 0:
            return self.deg0.copy(), self.tri0.copy()
        deg = self.deg0 - np.bincount(self._endpoints[eids].ravel(), minlength=self.n)
        dead = self._triangles_of(eids)
        if dead.size:
            dead = np.unique(dead)
            tri = self.tri0 - np.bincount(self.tri_nodes[dead].ravel(), minlength=self.n)
        else:
            tri = self.tri0.copy()
        return deg, tri

    def unique_mask(self, bits) -> np.ndarray:
        return unique_mask_from_states(*self.states(bits))

    def unique_count(self, bits) -> int:
        return int(self.unique_mask(bits).sum())

    def unique_edge_mask(self, bits, node_mask: np.ndarray | None = None) -> np.ndarray:
        """Surviving edges touching a unique node of the derived graph."""
        bits = np.asarray(bits, dtype=bool)
        if node_mask is None:
            node_mask = self.unique_mask(bits)
        ends = self._endpoints
        return (node_mask[ends[:, 0]] | node_mask[ends[:, 1]]) & ~bits
