"""Client intent data model: decoding, canonical encoding and validation.

The wire format has two entry points, ``endpoints`` (read-only, the endpoints
the provider assigned to the client) and ``topologies`` (the client's
installed virtual-topology requests)::

    {
      "endpoints": {"assigned-endpoints": [{"endpoint-id": "A1"}, ...]},
      "topologies": {"installed-topologies": [
        {"topology-id": "Client A",
         "intents": [{"intent-id": "Intent A",
                      "endpoints": ["A1", "A2", "A3"],
                      "dedicated-bandwidth": 10000,
                      "flexible-bandwidth": 5000,
                      "minimum-paths": 2,
                      "disjoint-paths": "link",
                      "protection": false,
                      "maximum-active-connections": 2}]}]}
    }

Bandwidths are in Mbit/s. ``disjoint-paths`` also accepts ``"none"``, and
``maximum-active-connections`` of 0 means no cap. Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from ._json import dumps_pretty, loads_strict
from .errors import DuplicateKey, SchemaViolation, Violation
from .pathcomp import DisjointMode
from .phys import valid_identifier

INTENT_KEYS = (
    "intent-id",
    "endpoints",
    "dedicated-bandwidth",
    "flexible-bandwidth",
    "minimum-paths",
    "disjoint-paths",
    "protection",
    "maximum-active-connections",
)
TOPOLOGY_KEYS = ("topology-id", "intents")


@dataclass(frozen=True)
class IntentSpec:
    intent_id: str
    endpoints: tuple[str, ...]
    dedicated_bandwidth_mbps: int
    flexible_bandwidth_mbps: int
    minimum_paths: int
    disjoint_paths: DisjointMode
    protection: bool
    maximum_active_connections: int

    @property
    def unlimited(self) -> bool:
        return self.maximum_active_connections == 0

    def pairs(self) -> list[tuple[str, str]]:
        """Unordered endpoint pairs in lexicographic order."""
        eps = sorted(set(self.endpoints))
        return [(a, b) for i, a in enumerate(eps) for b in eps[i + 1 :]]

    def to_json(self) -> dict[str, Any]:
        return {
            "intent-id": self.intent_id,
            "endpoints": list(self.endpoints),
            "dedicated-bandwidth": self.dedicated_bandwidth_mbps,
            "flexible-bandwidth": self.flexible_bandwidth_mbps,
            "minimum-paths": self.minimum_paths,
            "disjoint-paths": self.disjoint_paths.value,
            "protection": self.protection,
            "maximum-active-connections": self.maximum_active_connections,
        }


@dataclass(frozen=True)
class TopologyRequest:
    topology_id: str
    intents: tuple[IntentSpec, ...]

    def intent(self, intent_id: str) -> IntentSpec:
        for item in self.intents:
            if item.intent_id == intent_id:
                return item
        raise KeyError(intent_id)

    def to_json(self) -> dict[str, Any]:
        return {
            "topology-id": self.topology_id,
            "intents": [i.to_json() for i in self.intents],
        }


@dataclass(frozen=True)
class EndpointAssignment:
    client: str
    endpoints: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {"assigned-endpoints": [{"endpoint-id": ep} for ep in self.endpoints]}


# --- decoding --------------------------------------------------------------


def _object(value: Any, path: str, keys: Sequence[str]) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise SchemaViolation(path or "$", "expected an object")
    for key in keys:
        if key not in value:
            raise SchemaViolation(f"{path}.{key}", "missing")
    for key in value:
        if key not in keys:
            raise SchemaViolation(f"{path}.{key}", "unknown key")
    return value


def _array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaViolation(path, "expected an array")
    return value


def _ident(value: Any, path: str) -> str:
    if not valid_identifier(value):
        raise SchemaViolation(path, f"expected a non-empty identifier, got {value!r}")
    return value


def _int(value: Any, path: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected an integer, got {value!r}")
    if value < minimum:
        raise SchemaViolation(path, f"must be >= {minimum}, got {value}")
    return value


def intent_from_json(value: Any, path: str) -> IntentSpec:
    raw = _object(value, path, INTENT_KEYS)
    eps_path = f"{path}.endpoints"
    endpoints = tuple(
        _ident(ep, f"{eps_path}[{i}]") for i, ep in enumerate(_array(raw["endpoints"], eps_path))
    )
    if len(endpoints) < 2:
        raise SchemaViolation(eps_path, "an intent needs at least two endpoints")
    for i, ep in enumerate(endpoints):
        if ep in endpoints[:i]:
            raise DuplicateKey(f"{eps_path}[{i}]", ep)
    mode = raw["disjoint-paths"]
    if mode not in {m.value for m in DisjointMode}:
        raise SchemaViolation(f"{path}.disjoint-paths", f"expected link, node or none, got {mode!r}")
    if not isinstance(raw["protection"], bool):
        raise SchemaViolation(f"{path}.protection", "expected a boolean")
    return IntentSpec(
        intent_id=_ident(raw["intent-id"], f"{path}.intent-id"),
        endpoints=endpoints,
        dedicated_bandwidth_mbps=_int(raw["dedicated-bandwidth"], f"{path}.dedicated-bandwidth", 0),
        flexible_bandwidth_mbps=_int(raw["flexible-bandwidth"], f"{path}.flexible-bandwidth", 0),
        minimum_paths=_int(raw["minimum-paths"], f"{path}.minimum-paths", 1),
        disjoint_paths=DisjointMode(mode),
        protection=raw["protection"],
        maximum_active_connections=_int(
            raw["maximum-active-connections"], f"{path}.maximum-active-connections", 0
        ),
    )


def request_from_json(value: Any, path: str = "") -> TopologyRequest:
    raw = _object(value, path, TOPOLOGY_KEYS)
    topology_id = _ident(raw["topology-id"], f"{path}.topology-id")
    items = _array(raw["intents"], f"{path}.intents")
    if not items:
        raise SchemaViolation(f"{path}.intents", "a topology needs at least one intent")
    intents = []
    seen: set[str] = set()
    for i, item in enumerate(items):
        intent = intent_from_json(item, f"{path}.intents[{i}]")
        if intent.intent_id in seen:
            raise DuplicateKey(f"{path}.intents[{i}].intent-id", intent.intent_id)
        seen.add(intent.intent_id)
        intents.append(intent)
    return TopologyRequest(topology_id, tuple(intents))


def decode_request(document: bytes | str) -> TopologyRequest:
    """Decode one topology object (``{"topology-id": ..., "intents": [...]}``).

    A ``topologies`` subtree holding exactly one installed topology is
    accepted as well.
    """
    raw = loads_strict(document)
    if isinstance(raw, dict) and "topologies" in raw and "topology-id" not in raw:
        wrapper = _object(raw, "", ("topologies",))
        inner = _object(wrapper["topologies"], ".topologies", ("installed-topologies",))
        base = ".topologies.installed-topologies"
        items = _array(inner["installed-topologies"], base)
        if len(items) != 1:
            raise SchemaViolation(base, "expected exactly one topology")
        return request_from_json(items[0], f"{base}[0]")
    return request_from_json(raw)


def decode_state(document: bytes | str) -> tuple[list[str], list[TopologyRequest]]:
    """Decode a full ``endpoints`` + ``topologies`` document.

    Returns the assigned endpoint ids and the installed requests.
    """
    raw = _object(loads_strict(document), "", ("endpoints", "topologies"))
    eps_raw = _object(raw["endpoints"], ".endpoints", ("assigned-endpoints",))
    assigned: list[str] = []
    base = ".endpoints.assigned-endpoints"
    for i, item in enumerate(_array(eps_raw["assigned-endpoints"], base)):
        ep = _ident(_object(item, f"{base}[{i}]", ("endpoint-id",))["endpoint-id"], f"{base}[{i}].endpoint-id")
        if ep in assigned:
            raise DuplicateKey(f"{base}[{i}].endpoint-id", ep)
        assigned.append(ep)
    topo_raw = _object(raw["topologies"], ".topologies", ("installed-topologies",))
    base = ".topologies.installed-topologies"
    requests: list[TopologyRequest] = []
    for i, item in enumerate(_array(topo_raw["installed-topologies"], base)):
        request = request_from_json(item, f"{base}[{i}]")
        if any(r.topology_id == request.topology_id for r in requests):
            raise DuplicateKey(f"{base}[{i}].topology-id", request.topology_id)
        requests.append(request)
    return assigned, requests


# --- encoding --------------------------------------------------------------


def endpoints_json(assignment: EndpointAssignment) -> dict[str, Any]:
    return {"endpoints": assignment.to_json()}


def topologies_json(installed: Sequence[TopologyRequest]) -> dict[str, Any]:
    return {"topologies": {"installed-topologies": [r.to_json() for r in installed]}}


def state_json(assignment: EndpointAssignment, installed: Sequence[TopologyRequest]) -> dict[str, Any]:
    return {**endpoints_json(assignment), **topologies_json(installed)}


def encode_state(assignment: EndpointAssignment, installed: Sequence[TopologyRequest]) -> bytes:
    """Canonical two-space-indented document with both entry points."""
    return dumps_pretty(state_json(assignment, installed))


def encode_request(request: TopologyRequest) -> bytes:
    return dumps_pretty(request.to_json())


# --- validation ------------------------------------------------------------


def validate_request(request: TopologyRequest, assignment: EndpointAssignment) -> list[Violation]:
    """Check a decoded request against the client's endpoint assignment.

    Violations come back in document order; an empty list means the request
    may be handed to the topology creator.
    """
    out: list[Violation] = []
    assigned = set(assignment.endpoints)
    seen_intents: set[str] = set()
    for intent in request.intents:
        if intent.intent_id in seen_intents:
            out.append(Violation("DuplicateIntent", intent.intent_id))
        seen_intents.add(intent.intent_id)
        if intent.dedicated_bandwidth_mbps + intent.flexible_bandwidth_mbps <= 0:
            out.append(Violation("ZeroBandwidth", intent.intent_id))
        if len(set(intent.endpoints)) < 2:
            out.append(Violation("TooFewEndpoints", intent.intent_id))
        if intent.minimum_paths < 1:
            out.append(Violation("NonPositiveMinimumPaths", intent.intent_id))
        if intent.maximum_active_connections < 0:
            out.append(Violation("NegativeCap", intent.intent_id))
        for ep in intent.endpoints:
            if ep not in assigned:
                out.append(Violation("UnassignedEndpoint", ep, intent.intent_id))
    return out
