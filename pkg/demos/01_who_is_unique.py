"""
Which nodes are unique, and how deleting edges hides them
=========================================================

A node is identified by the pair (degree, number of triangles it sits in).
If no other node shares that pair, an attacker who knows the node's
neighbourhood can single it out.
"""
import numpy as np

from anonet.anonymity import build_view
from anonet.graph import Graph

# a small graph with a few distinctive nodes
edges = [(0, 1), (0, 5), (0, 6), (0, 8), (1, 2), (1, 3), (1, 4), (1, 8),
         (2, 5), (2, 6), (2, 7), (3, 4), (3, 5), (4, 7), (5, 6)]
g = Graph(9, edges)

view = build_view(g)
for v in range(g.n):
    mark = "unique" if v in view.unique else ""
    print(f"node {v}: state {tuple(view.state(v))} {mark}")
print(f"{view.unique_count} of {g.n} nodes unique (U = {view.uniqueness():.2f})")

# deleting one edge changes the states of its two endpoints and of every
# common neighbour; the view updates in place
e = g.edge_index(0, 1)
changed = view.delete_edge(e)
print(f"\nafter deleting (0, 1): states of {sorted(changed)} changed")
print(f"{view.unique_count} unique nodes remain: {sorted(view.unique)}")

# the same number from scratch, for reassurance
bits = np.zeros(g.m, dtype=bool)
bits[e] = True
print("from scratch:", build_view(g.delete_edges(bits)).unique_count)
