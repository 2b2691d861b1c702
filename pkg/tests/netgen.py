"""Random physical networks and intent streams for fuzz tests."""

from __future__ import annotations

import json
import random

from lumen.intent import IntentSpec, TopologyRequest
from lumen.pathcomp import DisjointMode
from lumen.phys import PhysicalTopology, parse_physical_topology
from lumen.vtc import parse_constraints


def ten_node_network(seed: int = 0, max_km: int = 700) -> PhysicalTopology:
    """Six ROADMs (ring plus chords) and four dual-homed terminals with two client ports each."""
    rng = random.Random(seed)
    roadms = [f"R{i}" for i in range(6)]
    pairs = {(i, (i + 1) % 6) for i in range(6)}
    pairs |= {(0, 3), (1, 4)}
    degree: dict[str, list[str]] = {r: [] for r in roadms}
    links = []
    for i, j in sorted(pairs):
        a, b = roadms[i], roadms[j]
        degree[a].append(f"d-{b}")
        degree[b].append(f"d-{a}")
        links.append(_link(f"F-{a}-{b}", a, f"d-{b}", b, f"d-{a}", rng.randint(40, max_km)))
    nodes = []
    endpoints = []
    for t in range(4):
        term = f"T{t}"
        homes = rng.sample(roadms, 2)
        lines = []
        for k, home in enumerate(homes):
            degree[home].append(f"d-{term}")
            lines.append(f"l{k}")
            links.append(_link(f"F-{term}-{home}", term, f"l{k}", home, f"d-{term}", rng.randint(5, 60)))
        clients = ["c0", "c1"]
        conn = [[c, ln] for c in clients for ln in lines] + [[ln, c] for c in clients for ln in lines]
        nodes.append({"id": term, "kind": "terminal", "tps": clients + lines, "connectivity": conn})
        for c in clients:
            endpoints.append({"endpoint-id": f"E{2 * t + int(c[1]) + 1}", "node": term, "tp": c})
    nodes += [{"id": r, "kind": "roadm", "tps": degree[r]} for r in roadms]
    return parse_physical_topology(json.dumps({"nodes": nodes, "links": links, "endpoints": endpoints}))


def _link(lid, a, ta, b, tb, km):
    return {"id": lid, "a": {"node": a, "tp": ta}, "b": {"node": b, "tp": tb}, "length-km": km}


TWO_CLIENTS = parse_constraints(
    json.dumps(
        {
            "hide-interior": False,
            "assignments": [
                {"client": "A", "endpoints": ["E1", "E3", "E5", "E7"]},
                {"client": "B", "endpoints": ["E2", "E4", "E6", "E8"]},
            ],
        }
    )
)


def random_request(rng: random.Random, client_eps: list[str], topology_id: str) -> TopologyRequest:
    intents = []
    for i in range(rng.randint(1, 2)):
        eps = rng.sample(client_eps, rng.randint(2, min(3, len(client_eps))))
        dedicated = rng.choice([0, 10000, 40000, 100000, 200000])
        flexible = rng.choice([0, 5000, 60000]) or (0 if dedicated else 5000)
        intents.append(
            IntentSpec(
                intent_id=f"I{i}",
                endpoints=tuple(eps),
                dedicated_bandwidth_mbps=dedicated,
                flexible_bandwidth_mbps=flexible,
                minimum_paths=rng.choice([1, 1, 2, 2, 3]),
                disjoint_paths=rng.choice(list(DisjointMode)),
                protection=rng.random() < 0.3,
                maximum_active_connections=rng.choice([0, 1, 2, 5]),
            )
        )
    return TopologyRequest(topology_id, tuple(intents))
