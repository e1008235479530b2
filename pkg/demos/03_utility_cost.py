"""
What anonymization costs in utility
===================================

The six-number utility report compares the original graph with the graph
after deletion: edge fraction removed, changes in clustering, average
distance and largest-component share, overlap of the top betweenness nodes,
and agreement of community structure (NMI).
"""
import networkx as nx

from anonet.anonymity import build_view
from anonet.baselines import edge_sampling
from anonet.evolution import budget, preset, run
from anonet.graph import Graph
from anonet.utility import utility_report

G = nx.powerlaw_cluster_graph(300, 6, 0.5, seed=4)
g = Graph(G.number_of_nodes(), list(G.edges()))
gamma = budget(g.m, 0.05)
print(f"n={g.n} m={g.m} budget={gamma} unique nodes={build_view(g).unique_count}")

ga = run(g, preset("conf1", seed=0))
es = edge_sampling(g, gamma, seed=0)

for name, bits in [("nothing", []), ("GA", ga.best_bits), ("ES", es.best_bits(g.m))]:
    rep = utility_report(g, bits, seed=0, louvain_runs=20)
    print(f"\n{name}:")
    for key, value in rep.to_dict().items():
        print(f"  {key:<28} {value: .4f}")
