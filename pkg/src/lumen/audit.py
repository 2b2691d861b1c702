"""Independent consistency checks over installed topologies and spectrum.

These functions only look at the recorded data (link lists, slot ranges, the
raw occupancy maps). They never call into path computation or the topology
creator, so they can audit those modules.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .phys import PhysicalTopology
from .spectrum import ReservationClass, SpectrumPool, TransceiverProfile
from .vtc import WORKING, RealizedTopology


def dedicated_overlaps(pool: SpectrumPool) -> list[str]:
    """Slots that are dedicated and shared at once, or claimed by two dedicated tokens."""
    problems = []
    claims: dict[tuple[str, int], str] = {}
    for token in pool.live.values():
        if token.cls is not ReservationClass.DEDICATED:
            continue
        for link in token.links:
            for slot in token.range.slots():
                key = (link, slot)
                if key in claims:
                    problems.append(f"{link}[{slot}] dedicated to {claims[key]} and {token.owner}")
                claims[key] = token.owner
    for link, state in pool.links.items():
        for slot in state.dedicated:
            if slot in state.shared:
                problems.append(f"{link}[{slot}] dedicated and shared")
    return problems


def continuity_violations(pool: SpectrumPool) -> list[str]:
    """Every live token must hold the same slot range on every link of its path."""
    problems = []
    for token in pool.live.values():
        for link in token.links:
            state = pool.links.get(link)
            if state is None:
                problems.append(f"{token.id}: unknown link {link}")
                continue
            for slot in token.range.slots():
                if token.cls is ReservationClass.DEDICATED:
                    ok = state.dedicated.get(slot) == token.owner
                else:
                    ok = token.owner in state.shared.get(slot, ())
                if not ok:
                    problems.append(f"{token.id}: {link}[{slot}] not held by {token.owner}")
    return problems


def orphan_slots(pool: SpectrumPool) -> list[str]:
    """Occupied slots that no live token accounts for."""
    owners: dict[tuple[str, int], set[str]] = {}
    for token in pool.live.values():
        for link in token.links:
            for slot in token.range.slots():
                owners.setdefault((link, slot), set()).add(token.owner)
    problems = []
    for link, state in pool.links.items():
        for slot, owner in state.dedicated.items():
            if owner not in owners.get((link, slot), ()):
                problems.append(f"{link}[{slot}] dedicated to unknown owner {owner}")
        for slot, shared in state.shared.items():
            stray = shared - owners.get((link, slot), set())
            if stray:
                problems.append(f"{link}[{slot}] shared by unknown owners {sorted(stray)}")
    return problems


def reach_violations(
    topologies: Iterable[RealizedTopology],
    topo: PhysicalTopology,
    table: Sequence[TransceiverProfile],
) -> list[str]:
    """Each supporting path must be within the reach of the profile it was sized with."""
    reach = {p.name: p.max_reach_km for p in table}
    problems = []
    for rt in topologies:
        for vl in rt.virtual_links:
            for sp in vl.paths:
                length = sum(topo.links[link].length_km for link in sp.path.links)
                limit = reach.get(sp.profile)
                if limit is None:
                    problems.append(f"{vl.id}: unknown profile {sp.profile}")
                elif length > limit + 1e-9:
                    problems.append(f"{vl.id}: {length} km exceeds {sp.profile} reach {limit} km")
    return problems


def _links_disjoint(a: Sequence[str], b: Sequence[str]) -> bool:
    return not set(a) & set(b)


def disjointness_violations(topologies: Iterable[RealizedTopology], topo: PhysicalTopology) -> list[str]:
    """Re-check working (and protection) paths against each intent's disjointness mode."""
    problems = []
    for rt in topologies:
        modes = {i.intent_id: i.disjoint_paths.value for i in rt.request.intents}
        protected = {i.intent_id: i.protection for i in rt.request.intents}
        minimum = {i.intent_id: i.minimum_paths for i in rt.request.intents}
        for vl in rt.virtual_links:
            mode = modes[vl.intent_id]
            working = [sp.path for sp in vl.paths if sp.role == WORKING]
            if len(working) < minimum[vl.intent_id]:
                problems.append(f"{vl.id}: {len(working)} working paths < {minimum[vl.intent_id]}")
            if protected[vl.intent_id] and len(vl.paths) != len(working) + 1:
                problems.append(f"{vl.id}: protection path missing")
            ends = {rt.attachments[vl.endpoints[0]].node, rt.attachments[vl.endpoints[1]].node}
            for sp in vl.paths:
                nodes = _walk(topo, sp.path.nodes[0], sp.path.links)
                if nodes is None or list(nodes) != list(sp.path.nodes):
                    problems.append(f"{vl.id}: recorded path does not follow its links")
                elif {nodes[0], nodes[-1]} != ends:
                    problems.append(f"{vl.id}: path ends {nodes[0]}-{nodes[-1]} not at endpoints")
                elif len(set(nodes)) != len(nodes):
                    problems.append(f"{vl.id}: path revisits a node")
            groups = [(working, mode)]
            if protected[vl.intent_id]:
                protect_mode = "link" if mode == "none" else mode
                groups.append(([sp.path for sp in vl.paths], protect_mode))
            for paths, m in groups:
                if m == "none":
                    continue
                for a, b in itertools.combinations(paths, 2):
                    if not _links_disjoint(a.links, b.links):
                        problems.append(f"{vl.id}: paths share a link")
                    elif m == "node" and set(a.nodes[1:-1]) & set(b.nodes[1:-1]):
                        problems.append(f"{vl.id}: paths share an interior node")
    return problems


def _walk(topo: PhysicalTopology, start: str, links: Sequence[str]) -> list[str] | None:
    nodes = [start]
    for link_id in links:
        link = topo.links.get(link_id)
        if link is None:
            return None
        if link.a.node == nodes[-1]:
            nodes.append(link.b.node)
        elif link.b.node == nodes[-1]:
            nodes.append(link.a.node)
        else:
            return None
    return nodes


def reservation_coverage(topologies: Iterable[RealizedTopology], pool: SpectrumPool) -> list[str]:
    """Tokens recorded on installed topologies and live tokens in the pool must coincide."""
    recorded = {}
    for rt in topologies:
        for token in rt.tokens():
            recorded[token.id] = token
    problems = []
    for token_id, token in recorded.items():
        live = pool.live.get(token_id)
        if live is None:
            problems.append(f"{token_id} recorded but not live")
        elif live != token:
            problems.append(f"{token_id} differs from the pool's record")
    for token_id in pool.live:
        if token_id not in recorded:
            problems.append(f"{token_id} live but owned by no topology")
    return problems


def full_audit(
    topologies: Mapping | Iterable[RealizedTopology],
    pool: SpectrumPool,
    topo: PhysicalTopology,
    table: Sequence[TransceiverProfile],
) -> list[str]:
    rts = list(topologies.values()) if isinstance(topologies, Mapping) else list(topologies)
    return (
        pool.violations()
        + dedicated_overlaps(pool)
        + continuity_violations(pool)
        + orphan_slots(pool)
        + reach_violations(rts, topo, table)
        + disjointness_violations(rts, topo)
        + reservation_coverage(rts, pool)
    )
