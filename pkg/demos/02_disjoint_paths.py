"""
Why disjoint paths are computed jointly
=======================================

Taking the shortest path first and then searching again without its links
can fail even though two disjoint paths exist. Minimizing the total cost of
the pair finds them.
"""

from lumen.pathcomp import WeightedGraph, disjoint_paths, k_shortest, shortest_path

trap = WeightedGraph.from_edges(
    [("SA", "S", "A", 1), ("AB", "A", "B", 1), ("BT", "B", "T", 1), ("SB", "S", "B", 2), ("AT", "A", "T", 2)]
)

first = shortest_path(trap, "S", "T")
print("shortest:", first.nodes, first.cost)
print("after removing its links:", shortest_path(trap.without_links(first.links), "S", "T"))

pair = disjoint_paths(trap, "S", "T", 2, "link")
print("joint optimum:", [(p.nodes, p.cost) for p in pair], "total", sum(p.cost for p in pair))

# without a disjointness requirement the loopless k-shortest list is used instead
for p in k_shortest(trap, "S", "T", 10):
    print(f"  {p.cost:3.0f}  {'-'.join(p.nodes)}")
