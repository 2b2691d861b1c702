"""
Client A's virtual triangle
===========================

Decode the client's intent document, realize it on the shipped six-node
network and look at what the topology creator reserved.
"""

from importlib import resources

from lumen.audit import full_audit
from lumen.intent import decode_state
from lumen.phys import load_physical_topology
from lumen.spectrum import DEFAULT_PROFILES, SpectrumPool
from lumen.view import render_view, view_to_dot
from lumen.vtc import parse_constraints, realize

data = resources.files("lumen") / "data"

# three ROADMs in a triangle, three terminals each homed on two of them
topo = load_physical_topology(data / "six_node.json")
constraints = parse_constraints((data / "six_node_constraints.json").read_bytes())
print(f"{len(topo.nodes)} nodes, {len(topo.links)} fibers, endpoints {sorted(topo.endpoints)}")

# the request: one intent over A1, A2, A3 with two link-disjoint paths per pair
assigned, (request,) = decode_state((data / "client_a_state.json").read_bytes())
intent = request.intents[0]
print(f"{request.topology_id}: {intent.intent_id} over {intent.endpoints}, "
      f"{intent.dedicated_bandwidth_mbps} Mb/s dedicated + {intent.flexible_bandwidth_mbps} Mb/s flexible")

pool = SpectrumPool(topo.links)
rt = realize(request, "Client A", topo, constraints, pool)

# one virtual link per endpoint pair, each backed by two fiber-disjoint paths
for vl in rt.virtual_links:
    print(vl.id)
    for sp in vl.paths:
        route = " > ".join(sp.path.nodes)
        print(f"   {sp.role:8s} {route:22s} {sp.path.cost:6.0f} km  {sp.profile}"
              f"  dedicated {sp.dedicated.range.slots()}  flexible {sp.flexible.range.slots()}")

# the auditors re-check overlaps, continuity, reach and disjointness from the raw records
print("audit:", full_audit([rt], pool, topo, DEFAULT_PROFILES) or "clean")

# the client sees only endpoints and capacities when the interior is hidden
print(view_to_dot(render_view(rt, hide_interior=True)))
