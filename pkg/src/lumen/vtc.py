"""Virtual topology creation: from a validated request to reserved spectrum.

Every intent becomes a full mesh of virtual links, one per unordered endpoint
pair. Each virtual link is backed by ``minimum-paths`` working paths (disjoint
per the intent's mode) and, if protection is requested, one more path
disjoint from all of them. Every path independently carries the intent's full
dedicated demand (exclusive slots) and flexible demand (shared slots).

:func:`realize` either reserves everything or leaves the spectrum untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Collection, Mapping, Sequence

from ._json import loads_strict
from .errors import (
    ActiveConnectionsExist,
    AlreadyInstalled,
    InfeasiblePaths,
    InsufficientSpectrum,
    NoFeasibleProfile,
    RequestRejected,
    DuplicateKey,
    SchemaViolation,
    Violation,
)
from .intent import EndpointAssignment, IntentSpec, TopologyRequest, request_from_json, validate_request
from .pathcomp import (
    DisjointMode,
    Path,
    WeightedGraph,
    disjoint_paths,
    k_shortest,
    max_disjoint_count,
    shortest_path,
)
from .phys import Attachment, PhysicalTopology, adjacency_view, valid_identifier
from .spectrum import (
    DEFAULT_PROFILES,
    ReservationClass,
    ReservationToken,
    SpectrumPool,
    TransceiverProfile,
    apply_reservation,
    first_fit,
    release_reservation,
    slots_for_demand,
)

WORKING = "working"
PROTECTION = "protection"


@dataclass(frozen=True)
class SupportingPath:
    path: Path
    role: str
    profile: str
    dedicated: ReservationToken | None
    flexible: ReservationToken | None

    @property
    def tokens(self) -> list[ReservationToken]:
        return [t for t in (self.dedicated, self.flexible) if t is not None]

    def to_json(self) -> dict[str, Any]:
        return {
            "role": self.role,
            "path": self.path.to_json(),
            "profile": self.profile,
            "dedicated": self.dedicated.to_json() if self.dedicated else None,
            "flexible": self.flexible.to_json() if self.flexible else None,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SupportingPath":
        return cls(
            Path.from_json(data["path"]),
            data["role"],
            data["profile"],
            ReservationToken.from_json(data["dedicated"]) if data["dedicated"] else None,
            ReservationToken.from_json(data["flexible"]) if data["flexible"] else None,
        )


@dataclass(frozen=True)
class VirtualLink:
    id: str
    intent_id: str
    endpoints: tuple[str, str]
    paths: tuple[SupportingPath, ...]
    flexible_shortfall: bool

    @property
    def working(self) -> list[SupportingPath]:
        return [p for p in self.paths if p.role == WORKING]

    @property
    def protection(self) -> list[SupportingPath]:
        return [p for p in self.paths if p.role == PROTECTION]

    @property
    def tokens(self) -> list[ReservationToken]:
        return [t for p in self.paths for t in p.tokens]

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "intent-id": self.intent_id,
            "endpoints": list(self.endpoints),
            "paths": [p.to_json() for p in self.paths],
            "flexible-shortfall": self.flexible_shortfall,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "VirtualLink":
        return cls(
            data["id"],
            data["intent-id"],
            tuple(data["endpoints"]),
            tuple(SupportingPath.from_json(p) for p in data["paths"]),
            bool(data["flexible-shortfall"]),
        )


@dataclass(frozen=True)
class RealizedTopology:
    client: str
    request: TopologyRequest
    virtual_links: tuple[VirtualLink, ...]
    attachments: Mapping[str, Attachment]
    created_at: int = 0

    @property
    def topology_id(self) -> str:
        return self.request.topology_id

    @property
    def per_intent_cap(self) -> dict[str, int]:
        return {i.intent_id: i.maximum_active_connections for i in self.request.intents}

    def link(self, link_id: str) -> VirtualLink:
        for vl in self.virtual_links:
            if vl.id == link_id:
                return vl
        raise KeyError(link_id)

    def tokens(self) -> list[ReservationToken]:
        return [t for vl in self.virtual_links for t in vl.tokens]

    def to_json(self) -> dict[str, Any]:
        return {
            "client": self.client,
            "request": self.request.to_json(),
            "virtual-links": [vl.to_json() for vl in self.virtual_links],
            "attachments": {
                ep: {"node": a.node, "tp": a.tp} for ep, a in sorted(self.attachments.items())
            },
            "created-at": self.created_at,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RealizedTopology":
        return cls(
            data["client"],
            request_from_json(data["request"]),
            tuple(VirtualLink.from_json(v) for v in data["virtual-links"]),
            {ep: Attachment(a["node"], a["tp"]) for ep, a in data["attachments"].items()},
            int(data["created-at"]),
        )


@dataclass
class ProviderConstraints:
    """Endpoint assignments per client plus the abstraction switch."""

    assignments: dict[str, EndpointAssignment] = field(default_factory=dict)
    hide_interior: bool = False

    def assignment(self, client: str) -> EndpointAssignment:
        return self.assignments.get(client, EndpointAssignment(client, ()))

    def violations(self, topo: PhysicalTopology | None = None) -> list[Violation]:
        out = []
        owner: dict[str, str] = {}
        for client, assignment in self.assignments.items():
            if client != assignment.client:
                out.append(Violation("KeyMismatch", client, assignment.client))
            seen: set[str] = set()
            for ep in assignment.endpoints:
                if ep in seen:
                    out.append(Violation("DuplicateEndpoint", client, ep))
                seen.add(ep)
                if ep in owner and owner[ep] != client:
                    out.append(Violation("EndpointAssignedTwice", ep, f"{owner[ep]},{client}"))
                owner.setdefault(ep, client)
                if topo is not None and ep not in topo.endpoints:
                    out.append(Violation("DanglingReference", client, ep))
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "hide-interior": self.hide_interior,
            "assignments": [
                {"client": a.client, "endpoints": list(a.endpoints)} for a in self.assignments.values()
            ],
        }


def parse_constraints(document: bytes | str) -> ProviderConstraints:
    """Decode a provider constraints file.

    Format: ``{"hide-interior": bool, "assignments": [{"client": str,
    "endpoints": [str, ...]}, ...]}``; ``hide-interior`` is optional.
    """
    raw = loads_strict(document)
    if not isinstance(raw, dict):
        raise SchemaViolation("$", "expected an object")
    extra = set(raw) - {"hide-interior", "assignments"}
    if extra:
        raise SchemaViolation(f".{sorted(extra)[0]}", "unknown key")
    hide = raw.get("hide-interior", False)
    if not isinstance(hide, bool):
        raise SchemaViolation(".hide-interior", "expected a boolean")
    items = raw.get("assignments")
    if not isinstance(items, list):
        raise SchemaViolation(".assignments", "expected an array")
    assignments: dict[str, EndpointAssignment] = {}
    for i, item in enumerate(items):
        where = f".assignments[{i}]"
        if not isinstance(item, dict) or set(item) != {"client", "endpoints"}:
            raise SchemaViolation(where, "expected {client, endpoints}")
        client = item["client"]
        if not valid_identifier(client):
            raise SchemaViolation(f"{where}.client", "invalid identifier")
        if client in assignments:
            raise DuplicateKey(f"{where}.client", client)
        eps = item["endpoints"]
        if not isinstance(eps, list) or not all(valid_identifier(e) for e in eps):
            raise SchemaViolation(f"{where}.endpoints", "expected an array of identifiers")
        assignments[client] = EndpointAssignment(client, tuple(eps))
    return ProviderConstraints(assignments, hide)


# --- realization -----------------------------------------------------------


def virtual_link_id(topology_id: str, intent_id: str, pair: tuple[str, str]) -> str:
    return f"{topology_id}/{intent_id}/{pair[0]}-{pair[1]}"


def _find_paths(g: WeightedGraph, intent: IntentSpec, pair: tuple[str, str], src: str, dst: str):
    k = intent.minimum_paths
    needed = k + (1 if intent.protection else 0)
    if src == dst:
        raise InfeasiblePaths(pair, needed, 0)
    mode = intent.disjoint_paths
    if mode is DisjointMode.NONE:
        working = k_shortest(g, src, dst, k)
        if len(working) < k:
            raise InfeasiblePaths(pair, needed, len(working))
        if not intent.protection:
            return working, None
        used = {link for p in working for link in p.links}
        protect = shortest_path(g.without_links(used), src, dst)
        if protect is None:
            raise InfeasiblePaths(pair, needed, k)
        return working, protect
    paths = disjoint_paths(g, src, dst, needed, mode)
    if paths is None:
        raise InfeasiblePaths(pair, needed, max_disjoint_count(g, src, dst, mode, needed - 1))
    # the costliest member of the optimal set stands by as protection
    return paths[:k], (paths[k] if intent.protection else None)


def _reserve(
    pool: SpectrumPool,
    path: Path,
    bitrate: int,
    cls: ReservationClass,
    owner: str,
    table: Sequence[TransceiverProfile],
    pair: tuple[str, str],
) -> ReservationToken | None:
    try:
        count, _ = slots_for_demand(bitrate, path.cost, table)
    except NoFeasibleProfile:
        raise NoFeasibleProfile(path.cost, pair) from None
    found = first_fit([pool.links[link] for link in path.links], count, cls, owner)
    if found is None:
        return None
    return apply_reservation(pool, list(path.links), found, cls, owner)


def realize(
    request: TopologyRequest,
    client: str,
    topo: PhysicalTopology,
    constraints: ProviderConstraints,
    pool: SpectrumPool,
    table: Sequence[TransceiverProfile] = DEFAULT_PROFILES,
    installed: Collection[str] = (),
    created_at: int = 0,
    graph: WeightedGraph | None = None,
) -> RealizedTopology:
    """Reserve paths and spectrum for every intent of ``request``.

    Mutates ``pool`` on success only. ``installed`` holds the topology ids
    this client already has.

    Raises:
        RequestRejected: the request fails validation for this client.
        AlreadyInstalled: ``request.topology_id`` is in ``installed``.
        InfeasiblePaths: some pair lacks enough (disjoint) paths.
        NoFeasibleProfile: some path exceeds every transceiver's reach.
        InsufficientSpectrum: no continuous range fits a dedicated demand.
    """
    violations = validate_request(request, constraints.assignment(client))
    if violations:
        raise RequestRejected(violations)
    if request.topology_id in installed:
        raise AlreadyInstalled(f"topology {request.topology_id!r} is already installed for {client!r}")
    g = graph if graph is not None else adjacency_view(topo)

    applied: list[ReservationToken] = []
    links: list[VirtualLink] = []
    next_token = pool.next_token
    try:
        for intent in request.intents:
            for pair in intent.pairs():
                src, dst = topo.endpoints[pair[0]].node, topo.endpoints[pair[1]].node
                working, protect = _find_paths(g, intent, pair, src, dst)
                planned = [(p, WORKING, i) for i, p in enumerate(working)]
                if protect is not None:
                    planned.append((protect, PROTECTION, 0))
                link_id = virtual_link_id(request.topology_id, intent.intent_id, pair)
                supporting = []
                shortfall = False
                for path, role, index in planned:
                    owner = f"{client}|{link_id}|{role}{index}"
                    _, profile = _profile_for(path, table, pair)
                    dedicated = flexible = None
                    if intent.dedicated_bandwidth_mbps > 0:
                        dedicated = _reserve(
                            pool, path, intent.dedicated_bandwidth_mbps,
                            ReservationClass.DEDICATED, owner + "|dedicated", table, pair,
                        )
                        if dedicated is None:
                            raise InsufficientSpectrum(pair, list(path.links))
                        applied.append(dedicated)
                    if intent.flexible_bandwidth_mbps > 0:
                        flexible = _reserve(
                            pool, path, intent.flexible_bandwidth_mbps,
                            ReservationClass.SHARED, owner + "|flexible", table, pair,
                        )
                        if flexible is None:
                            shortfall = True
                        else:
                            applied.append(flexible)
                    supporting.append(SupportingPath(path, role, profile.name, dedicated, flexible))
                links.append(VirtualLink(link_id, intent.intent_id, pair, tuple(supporting), shortfall))
    except BaseException:
        for token in reversed(applied):
            release_reservation(pool, token)
            # a rolled-back token never existed as far as the pool is concerned
            pool.released.discard(token.id)
        pool.next_token = next_token
        raise

    endpoints = {ep for intent in request.intents for ep in intent.endpoints}
    attachments = {ep: topo.endpoints[ep] for ep in sorted(endpoints)}
    return RealizedTopology(client, request, tuple(links), attachments, created_at)


def _profile_for(path: Path, table: Sequence[TransceiverProfile], pair: tuple[str, str]):
    try:
        return slots_for_demand(1, path.cost, table)
    except NoFeasibleProfile:
        raise NoFeasibleProfile(path.cost, pair) from None


def teardown(
    rt: RealizedTopology, pool: SpectrumPool, active_connections: int = 0, force: bool = False
) -> None:
    """Release every reservation of ``rt``.

    The caller deletes the connections; this only checks that it may proceed.
    """
    if active_connections and not force:
        raise ActiveConnectionsExist(
            f"topology {rt.topology_id!r} has {active_connections} active connection(s)"
        )
    for token in reversed(rt.tokens()):
        release_reservation(pool, token)


def replace(
    old: RealizedTopology,
    request: TopologyRequest,
    topo: PhysicalTopology,
    constraints: ProviderConstraints,
    pool: SpectrumPool,
    table: Sequence[TransceiverProfile] = DEFAULT_PROFILES,
    installed: Collection[str] = (),
    created_at: int = 0,
    graph: WeightedGraph | None = None,
) -> tuple[RealizedTopology, SpectrumPool]:
    """Tear down ``old`` and realize ``request`` on a private copy of ``pool``.

    Returns the new topology and the pool to commit; ``pool`` itself is never
    modified, so a failure leaves the old topology fully intact.
    """
    work = pool.copy()
    teardown(old, work, force=True)
    others = [tid for tid in installed if tid != old.topology_id]
    rt = realize(request, old.client, topo, constraints, work, table, others, created_at, graph)
    return rt, work
