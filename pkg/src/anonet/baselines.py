"""Reference anonymizers: random edge sampling and a greedy unique-affect heuristic.

Both delete up to ``gamma`` edges in batches and record the number of unique
nodes after every batch, starting from the untouched graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .anonymity import AnonymityView, build_view
from .graph import Graph


@dataclass
class BaselineTrace:
    deleted: list[int]
    uniqueness_curve: list[int]
    seed: int | None = None
    batch_ends: list[int] = field(default_factory=list)

    def best_prefix(self) -> tuple[int, int]:
        """(number of deletions, |V_u|) at the batch boundary with fewest unique nodes.

        Ties go to the earliest boundary, i.e. the fewest deletions.
        """
        ends = [0, *self.batch_ends]
        i = int(np.argmin(self.uniqueness_curve))
        return ends[i], self.uniqueness_curve[i]

    def best_bits(self, m: int) -> np.ndarray:
        k, _ = self.best_prefix()
        bits = np.zeros(m, dtype=bool)
        bits[self.deleted[:k]] = True
        return bits


def _check(g: Graph, gamma: int, batches: int) -> int:
    if gamma > g.edge_count:
        raise ValueError(f"budget {gamma} exceeds edge count {g.edge_count}")
    if gamma < 0:
        raise ValueError("budget must be non-negative")
    if batches < 1:
        raise ValueError("need at least one batch")
    return math.ceil(gamma / batches) if gamma else 0


def edge_sampling(g: Graph, gamma: int, batches: int = 100, rng=None, seed: int | None = None) -> BaselineTrace:
    """Delete ``gamma`` uniformly random distinct edges."""
    size = _check(g, gamma, batches)
    rng = np.random.default_rng(seed) if rng is None else rng
    order = rng.permutation(g.edge_count)[:gamma].tolist()
    view = build_view(g)
    trace = BaselineTrace(deleted=[], uniqueness_curve=[view.unique_count], seed=seed)
    for start in range(0, gamma, size or 1):
        for e in order[start:start + size]:
            view.delete_edge(e)
            trace.deleted.append(e)
        trace.uniqueness_curve.append(view.unique_count)
        trace.batch_ends.append(len(trace.deleted))
    return trace


class _EdgeScores:
    """Per-edge count of unique nodes whose state changes if the edge goes.

    Deleting ``{v, w}`` changes the states of ``v``, ``w`` and every common
    neighbour, so the score is the number of those that are currently unique.
    Common neighbours are tracked through the triangle table: a triangle
    contributes its third corner until one of its edges is deleted.
    """

    def __init__(self, g: Graph):
        self.g = g
        self.tri_nodes, self.tri_edges = g.triangles
        self.alive_tri = np.ones(len(self.tri_nodes), dtype=bool)
        self.alive_edge = np.ones(g.edge_count, dtype=bool)
        flat = self.tri_edges.ravel()
        order = np.argsort(flat, kind="stable")
        self._tri_of_edge = order // 3
        self._ptr = np.zeros(g.edge_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=g.edge_count), out=self._ptr[1:])
        self.scores = np.zeros(g.edge_count, dtype=np.int64)
        self.unique = np.zeros(g.node_count, dtype=bool)

    def rescore(self, unique_nodes) -> None:
        uniq = np.zeros(self.g.node_count, dtype=bool)
        uniq[list(unique_nodes)] = True
        self.unique = uniq
        ends = self.g.edges
        contrib = uniq[self.tri_nodes] & self.alive_tri[:, None]
        self.scores = (uniq[ends[:, 0]].astype(np.int64) + uniq[ends[:, 1]]
                       + np.bincount(self.tri_edges.ravel(), weights=contrib.ravel(),
                                     minlength=self.g.edge_count).astype(np.int64))

    def remove(self, e: int) -> None:
        self.alive_edge[e] = False
        tris = self._tri_of_edge[self._ptr[e]:self._ptr[e + 1]]
        tris = tris[self.alive_tri[tris]]
        self.alive_tri[tris] = False
        for k in tris.tolist():
            for j in range(3):
                other = self.tri_edges[k, j]
                if other != e and self.unique[self.tri_nodes[k, j]]:
                    self.scores[other] -= 1

    def pick(self, rng) -> int:
        masked = np.where(self.alive_edge, self.scores, -1)
        best = np.flatnonzero(masked == masked.max())
        return int(best[rng.integers(len(best))]) if len(best) > 1 else int(best[0])


def unique_affect_greedy(g: Graph, gamma: int, batches: int = 100, rng=None,
                         seed: int | None = None) -> BaselineTrace:
    """Greedily delete the edge affecting the most unique nodes.

    The unique-node set is refreshed only between batches; within a batch the
    scores follow the live graph (earlier deletions shrink common
    neighbourhoods) but still count the stale unique set.
    """
    size = _check(g, gamma, batches)
    rng = np.random.default_rng(seed) if rng is None else rng
    view: AnonymityView = build_view(g)
    scores = _EdgeScores(g)
    trace = BaselineTrace(deleted=[], uniqueness_curve=[view.unique_count], seed=seed)
    while len(trace.deleted) < gamma:
        scores.rescore(view.unique)
        for _ in range(min(size, gamma - len(trace.deleted))):
            e = scores.pick(rng)
            scores.remove(e)
            view.delete_edge(e)
            trace.deleted.append(e)
        trace.uniqueness_curve.append(view.unique_count)
        trace.batch_ends.append(len(trace.deleted))
    return trace
