"""Physical substrate: ROADM and terminal nodes, fiber links, client endpoints.

The physical topology is loaded from a JSON file and is immutable afterwards.
Spectrum occupancy is not stored here; :mod:`lumen.spectrum` keys its state
by link id.

File format::

    {
      "nodes": [{"id": "R1", "kind": "roadm", "tps": ["d1", "d2"],
                 "connectivity": [["d1", "d2"], ["d2", "d1"]]}],
      "links": [{"id": "L1", "a": {"node": "T1", "tp": "c1"},
                 "b": {"node": "R1", "tp": "d1"}, "length-km": 10}],
      "endpoints": [{"endpoint-id": "A1", "node": "T1", "tp": "c1"}]
    }

``connectivity`` is optional. When absent every transit through the node is
allowed; when present it is exhaustive and must be symmetric and irreflexive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from ._json import dumps_pretty, loads_strict
from .errors import (
    DanglingReference,
    DuplicateId,
    InvalidAttachment,
    InvalidTopology,
    MalformedDocument,
    Violation,
)
from .pathcomp import Edge, WeightedGraph

NODE_KINDS = ("roadm", "terminal")
MAX_ID_BYTES = 128


@dataclass(frozen=True, order=True)
class Attachment:
    node: str
    tp: str

    def __str__(self) -> str:
        return f"{self.node}.{self.tp}"


@dataclass(frozen=True)
class PhysNode:
    id: str
    kind: str
    tps: tuple[str, ...]
    # None: every transit allowed. Otherwise the exhaustive set of (in, out) pairs.
    connectivity: frozenset[tuple[str, str]] | None = None

    def allows(self, tp_in: str, tp_out: str) -> bool:
        if tp_in == tp_out:
            return False
        if self.connectivity is None:
            return True
        return (tp_in, tp_out) in self.connectivity


@dataclass(frozen=True)
class FiberLink:
    id: str
    a: Attachment
    b: Attachment
    length_km: float


@dataclass(frozen=True)
class PhysicalTopology:
    nodes: Mapping[str, PhysNode]
    links: Mapping[str, FiberLink]
    endpoints: Mapping[str, Attachment]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhysicalTopology):
            return NotImplemented
        return (
            dict(self.nodes) == dict(other.nodes)
            and dict(self.links) == dict(other.links)
            and dict(self.endpoints) == dict(other.endpoints)
        )

    def link_tps(self) -> dict[Attachment, str]:
        """Map each fiber-bound TP to the link using it (first link wins)."""
        out: dict[Attachment, str] = {}
        for link in self.links.values():
            out.setdefault(link.a, link.id)
            out.setdefault(link.b, link.id)
        return out

    def endpoint_node(self, endpoint_id: str) -> str:
        return self.endpoints[endpoint_id].node


def empty_topology() -> PhysicalTopology:
    return PhysicalTopology({}, {}, {})


# --- validation ------------------------------------------------------------


def valid_identifier(value: object) -> bool:
    if not isinstance(value, str) or not value:
        return False
    if len(value.encode("utf-8")) > MAX_ID_BYTES:
        return False
    return not any(ord(ch) < 0x20 or ord(ch) == 0x7F for ch in value)


def validate_topology(t: PhysicalTopology) -> list[Violation]:
    """Check every structural invariant; returns violations in document order."""
    out: list[Violation] = []

    for key, node in t.nodes.items():
        if key != node.id:
            out.append(Violation("KeyMismatch", key, node.id))
        if node.kind not in NODE_KINDS:
            out.append(Violation("UnknownKind", node.id, str(node.kind)))
        seen: set[str] = set()
        for tp in node.tps:
            if tp in seen:
                out.append(Violation("DuplicateId", node.id, tp))
            seen.add(tp)
        if node.kind == "terminal" and not node.tps:
            out.append(Violation("NoClientTp", node.id))
        if node.connectivity is not None:
            for tp_in, tp_out in sorted(node.connectivity):
                for tp in (tp_in, tp_out):
                    if tp not in seen:
                        out.append(Violation("DanglingReference", node.id, tp))
                if tp_in == tp_out:
                    out.append(Violation("Irreflexivity", node.id, tp_in))
                elif (tp_out, tp_in) not in node.connectivity:
                    out.append(Violation("Asymmetry", node.id, f"{tp_in}->{tp_out}"))

    used: dict[Attachment, str] = {}
    for key, link in t.links.items():
        if key != link.id:
            out.append(Violation("KeyMismatch", key, link.id))
        for end in (link.a, link.b):
            node = t.nodes.get(end.node)
            if node is None:
                out.append(Violation("DanglingReference", link.id, end.node))
            elif end.tp not in node.tps:
                out.append(Violation("DanglingReference", link.id, str(end)))
            if end in used:
                out.append(Violation("TpReuse", str(end), f"{used[end]},{link.id}"))
            else:
                used[end] = link.id
        if link.a.node == link.b.node:
            out.append(Violation("SelfLoop", link.id, link.a.node))
        if not isinstance(link.length_km, (int, float)) or not math.isfinite(link.length_km):
            out.append(Violation("InvalidLength", link.id, str(link.length_km)))
        elif link.length_km < 0:
            out.append(Violation("NegativeLength", link.id, str(link.length_km)))

    attached: dict[Attachment, str] = {}
    for key, att in t.endpoints.items():
        node = t.nodes.get(att.node)
        if node is None:
            out.append(Violation("DanglingReference", key, att.node))
            continue
        if att.tp not in node.tps:
            out.append(Violation("DanglingReference", key, str(att)))
            continue
        if node.kind != "terminal":
            out.append(Violation("InvalidAttachment", key, str(att)))
        if att in attached:
            out.append(Violation("SharedAttachment", key, f"{attached[att]},{key}"))
        else:
            attached[att] = key
    return out


# --- codec -----------------------------------------------------------------


def _require(cond: bool, where: str, what: str) -> None:
    if not cond:
        raise MalformedDocument(f"{where}: {what}")


def _ident(value: Any, where: str) -> str:
    _require(valid_identifier(value), where, f"invalid identifier {value!r}")
    return value


def _obj(value: Any, where: str, required: Iterable[str], optional: Iterable[str] = ()) -> dict:
    _require(isinstance(value, dict), where, "expected an object")
    required = tuple(required)
    allowed = set(required) | set(optional)
    for key in required:
        _require(key in value, where, f"missing key {key!r}")
    extra = sorted(set(value) - allowed)
    _require(not extra, where, f"unexpected keys {extra}")
    return value


def _attachment(value: Any, where: str) -> Attachment:
    _obj(value, where, ("node", "tp"))
    return Attachment(_ident(value["node"], f"{where}.node"), _ident(value["tp"], f"{where}.tp"))


def parse_physical_topology(document: bytes | str) -> PhysicalTopology:
    """Decode and fully validate a Physical Topology File.

    Raises:
        MalformedDocument: not JSON, or the wrong shape.
        DuplicateId: a node, TP, link or endpoint id is defined twice.
        DanglingReference: an id is used but never defined.
        InvalidAttachment: an endpoint sits on a non-terminal node.
        InvalidTopology: any other invariant violation.
    """
    raw = loads_strict(document)
    _obj(raw, "$", ("nodes", "links", "endpoints"))
    for key in ("nodes", "links", "endpoints"):
        _require(isinstance(raw[key], list), f"$.{key}", "expected an array")

    nodes: dict[str, PhysNode] = {}
    for i, item in enumerate(raw["nodes"]):
        where = f"$.nodes[{i}]"
        _obj(item, where, ("id", "kind", "tps"), ("connectivity",))
        node_id = _ident(item["id"], f"{where}.id")
        if node_id in nodes:
            raise DuplicateId(f"node {node_id!r} defined twice", [Violation("DuplicateId", node_id)])
        _require(item["kind"] in NODE_KINDS, f"{where}.kind", f"expected one of {NODE_KINDS}")
        _require(isinstance(item["tps"], list), f"{where}.tps", "expected an array")
        tps = tuple(_ident(tp, f"{where}.tps[{j}]") for j, tp in enumerate(item["tps"]))
        if len(set(tps)) != len(tps):
            dup = next(tp for j, tp in enumerate(tps) if tp in tps[:j])
            raise DuplicateId(f"tp {dup!r} listed twice on {node_id!r}", [Violation("DuplicateId", node_id, dup)])
        conn = None
        if "connectivity" in item:
            _require(isinstance(item["connectivity"], list), f"{where}.connectivity", "expected an array")
            pairs = []
            for j, pair in enumerate(item["connectivity"]):
                w = f"{where}.connectivity[{j}]"
                _require(isinstance(pair, list) and len(pair) == 2, w, "expected [in, out]")
                pairs.append((_ident(pair[0], w), _ident(pair[1], w)))
            conn = frozenset(pairs)
        nodes[node_id] = PhysNode(node_id, item["kind"], tps, conn)

    links: dict[str, FiberLink] = {}
    for i, item in enumerate(raw["links"]):
        where = f"$.links[{i}]"
        _obj(item, where, ("id", "a", "b", "length-km"))
        link_id = _ident(item["id"], f"{where}.id")
        if link_id in links:
            raise DuplicateId(f"link {link_id!r} defined twice", [Violation("DuplicateId", link_id)])
        length = item["length-km"]
        _require(
            isinstance(length, (int, float)) and not isinstance(length, bool),
            f"{where}.length-km",
            "expected a number",
        )
        links[link_id] = FiberLink(
            link_id,
            _attachment(item["a"], f"{where}.a"),
            _attachment(item["b"], f"{where}.b"),
            float(length),
        )

    endpoints: dict[str, Attachment] = {}
    for i, item in enumerate(raw["endpoints"]):
        where = f"$.endpoints[{i}]"
        _obj(item, where, ("endpoint-id", "node", "tp"))
        ep = _ident(item["endpoint-id"], f"{where}.endpoint-id")
        if ep in endpoints:
            raise DuplicateId(f"endpoint {ep!r} defined twice", [Violation("DuplicateId", ep)])
        endpoints[ep] = Attachment(_ident(item["node"], f"{where}.node"), _ident(item["tp"], f"{where}.tp"))

    topo = PhysicalTopology(nodes, links, endpoints)
    violations = validate_topology(topo)
    if violations:
        raise _topology_error(violations)
    return topo


def _topology_error(violations: list[Violation]):
    first = violations[0]
    message = ", ".join(str(v) for v in violations)
    by_rule = {
        "DanglingReference": DanglingReference,
        "DuplicateId": DuplicateId,
        "InvalidAttachment": InvalidAttachment,
    }
    return by_rule.get(first.rule, InvalidTopology)(message, violations)


def topology_to_json(t: PhysicalTopology) -> dict[str, Any]:
    nodes = []
    for node in t.nodes.values():
        item: dict[str, Any] = {"id": node.id, "kind": node.kind, "tps": list(node.tps)}
        if node.connectivity is not None:
            item["connectivity"] = [list(p) for p in sorted(node.connectivity)]
        nodes.append(item)
    links = [
        {
            "id": link.id,
            "a": {"node": link.a.node, "tp": link.a.tp},
            "b": {"node": link.b.node, "tp": link.b.tp},
            "length-km": link.length_km,
        }
        for link in t.links.values()
    ]
    endpoints = [
        {"endpoint-id": ep, "node": att.node, "tp": att.tp} for ep, att in t.endpoints.items()
    ]
    return {"nodes": nodes, "links": links, "endpoints": endpoints}


def serialize_physical_topology(t: PhysicalTopology) -> bytes:
    return dumps_pretty(topology_to_json(t))


def load_physical_topology(path) -> PhysicalTopology:
    with open(path, "rb") as fh:
        return parse_physical_topology(fh.read())


# --- graph view ------------------------------------------------------------


def adjacency_view(t: PhysicalTopology) -> WeightedGraph:
    """Project the topology onto an undirected weighted graph for path computation.

    Edge weight is the fiber length. Nodes whose connectivity matrix forbids
    some transit between two fiber-bound TPs carry their allowed pairs as
    transit restrictions; all other nodes are plain vertices.
    """
    violations = validate_topology(t)
    if violations:
        raise InvalidTopology(", ".join(map(str, violations)), violations)

    edges = [
        Edge(link.id, link.a.node, link.b.node, link.length_km, link.a.tp, link.b.tp)
        for link in t.links.values()
    ]
    line_tps: dict[str, set[str]] = {node_id: set() for node_id in t.nodes}
    for link in t.links.values():
        line_tps[link.a.node].add(link.a.tp)
        line_tps[link.b.node].add(link.b.tp)

    transit: dict[str, frozenset[tuple[str, str]]] = {}
    for node in t.nodes.values():
        if node.connectivity is None:
            continue
        tps = sorted(line_tps[node.id])
        allowed = frozenset(
            (x, y) for x in tps for y in tps if x != y and node.allows(x, y)
        )
        if len(allowed) < len(tps) * (len(tps) - 1):
            transit[node.id] = allowed
    return WeightedGraph(t.nodes.keys(), edges, transit)
