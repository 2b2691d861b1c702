"""What the client controller sees: virtual topology views, connections, events.

Connections are bookkeeping over spectrum the topology creator already
reserved; activating one only consumes a unit of the owning intent's cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import AlreadyDeleted, CapExceeded, UnknownConnection, UnknownLink
from .vtc import RealizedTopology, VirtualLink

OBJECT_CREATED = "object-created"
OBJECT_DELETED = "object-deleted"
VALUE_CHANGED = "value-changed"
EVENT_KINDS = (OBJECT_CREATED, OBJECT_DELETED, VALUE_CHANGED)


# --- rendering -------------------------------------------------------------


def link_summary(rt: RealizedTopology, vl: VirtualLink) -> dict[str, Any]:
    intent = rt.request.intent(vl.intent_id)
    return {
        "link-id": vl.id,
        "intent-id": vl.intent_id,
        "endpoints": list(vl.endpoints),
        "available-dedicated-mbps": intent.dedicated_bandwidth_mbps,
        "available-flexible-mbps": 0 if vl.flexible_shortfall else intent.flexible_bandwidth_mbps,
        "flexible-shortfall": vl.flexible_shortfall,
        "path-count": len(vl.working),
        "protected": bool(vl.protection),
    }


def render_view(rt: RealizedTopology, hide_interior: bool = False) -> dict[str, Any]:
    """Project a realized topology onto the client-facing JSON view.

    With ``hide_interior`` the supporting physical node of each virtual node
    and every supporting path are left out; ids, bandwidths and path counts
    stay identical.
    """
    endpoints = sorted({ep for vl in rt.virtual_links for ep in vl.endpoints})
    nodes = []
    for ep in endpoints:
        node: dict[str, Any] = {"node-id": ep}
        if not hide_interior:
            att = rt.attachments[ep]
            node["supporting-node"] = {"node": att.node, "tp": att.tp}
        nodes.append(node)
    links = []
    for vl in rt.virtual_links:
        item = link_summary(rt, vl)
        if not hide_interior:
            item["supporting-paths"] = [
                {
                    "role": sp.role,
                    "nodes": list(sp.path.nodes),
                    "links": list(sp.path.links),
                    "length-km": sp.path.cost,
                    "profile": sp.profile,
                    "dedicated-slots": sp.dedicated.range.to_json() if sp.dedicated else None,
                    "flexible-slots": sp.flexible.range.to_json() if sp.flexible else None,
                }
                for sp in vl.paths
            ]
        links.append(item)
    return {"topology-id": rt.topology_id, "nodes": nodes, "links": links}


def view_to_dot(view: Mapping[str, Any]) -> str:
    """Graphviz rendering of a view, for humans."""

    def quote(s: str) -> str:
        return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [f"graph {quote(view['topology-id'])} {{"]
    for node in view["nodes"]:
        label = node["node-id"]
        if "supporting-node" in node:
            sup = node["supporting-node"]
            label += f"\\n{sup['node']}.{sup['tp']}"
        lines.append(f"  {quote(node['node-id'])} [label={quote(label)}];")
    for link in view["links"]:
        a, b = link["endpoints"]
        label = (
            f"{link['available-dedicated-mbps']}+{link['available-flexible-mbps']} Mb/s"
            f" x{link['path-count']}"
        )
        style = " style=dashed" if link["flexible-shortfall"] else ""
        lines.append(f"  {quote(a)} -- {quote(b)} [label={quote(label)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- events ----------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    object_type: str
    object_id: str
    client: str
    detail: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "object-type": self.object_type,
            "object-id": self.object_id,
            "client": self.client,
            "detail": dict(self.detail),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Event":
        return cls(
            int(data["seq"]),
            data["kind"],
            data["object-type"],
            data["object-id"],
            data["client"],
            dict(data["detail"]),
        )


class EventLog:
    """Append-only log with gap-free, strictly increasing sequence numbers."""

    def __init__(self, events: Iterable[Event] = (), high_water: int = 0):
        self.events: list[Event] = list(events)
        self.high_water = max([high_water] + [e.seq for e in self.events])

    def append(self, kind: str, object_type: str, object_id: str, client: str, **detail: Any) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        self.high_water += 1
        event = Event(self.high_water, kind, object_type, object_id, client, detail)
        self.events.append(event)
        return event

    def poll(self, since_seq: int = 0, limit: int = 100, client: str | None = None) -> list[Event]:
        if limit < 1:
            raise ValueError("limit must be positive")
        out = []
        # events are sorted by seq; skip the prefix cheaply
        lo, hi = 0, len(self.events)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.events[mid].seq <= since_seq:
                lo = mid + 1
            else:
                hi = mid
        for event in self.events[lo:]:
            if client is not None and event.client != client:
                continue
            out.append(event)
            if len(out) == limit:
                break
        return out

    def latest(self) -> int:
        return self.high_water


def replay_inventory(events: Iterable[Event]) -> set[tuple[str, str, str]]:
    """Rebuild the set of live ``(client, object_type, object_id)`` from the log."""
    inventory: set[tuple[str, str, str]] = set()
    for event in events:
        key = (event.client, event.object_type, event.object_id)
        if event.kind == OBJECT_CREATED:
            if key in inventory:
                raise ValueError(f"event {event.seq} creates existing {key}")
            inventory.add(key)
        elif event.kind == OBJECT_DELETED:
            if key not in inventory:
                raise ValueError(f"event {event.seq} deletes missing {key}")
            inventory.remove(key)
    return inventory


# --- connections -----------------------------------------------------------

ACTIVE = "active"
DELETED = "deleted"


@dataclass
class Connection:
    connection_id: str
    client: str
    topology_id: str
    intent_id: str
    virtual_link_id: str
    state: str = ACTIVE
    activated_at: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "connection-id": self.connection_id,
            "client": self.client,
            "topology-id": self.topology_id,
            "intent-id": self.intent_id,
            "virtual-link-id": self.virtual_link_id,
            "state": self.state,
            "activated-at": self.activated_at,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Connection":
        return cls(
            data["connection-id"],
            data["client"],
            data["topology-id"],
            data["intent-id"],
            data["virtual-link-id"],
            data["state"],
            int(data["activated-at"]),
        )


class ConnectionBook:
    """Connections of all clients, with per-intent cap enforcement."""

    def __init__(self, connections: Iterable[Connection] = (), next_id: int = 1):
        self.connections: dict[str, Connection] = {c.connection_id: c for c in connections}
        self.next_id = next_id

    def active(self, client: str | None = None, topology_id: str | None = None) -> list[Connection]:
        return [
            c
            for c in self.connections.values()
            if c.state == ACTIVE
            and (client is None or c.client == client)
            and (topology_id is None or c.topology_id == topology_id)
        ]

    def active_count(self, client: str, topology_id: str, intent_id: str) -> int:
        return sum(1 for c in self.active(client, topology_id) if c.intent_id == intent_id)

    def activate(self, rt: RealizedTopology, virtual_link_id: str, seq: int = 0) -> Connection:
        try:
            vl = rt.link(virtual_link_id)
        except KeyError:
            raise UnknownLink(f"no virtual link {virtual_link_id!r} in {rt.topology_id!r}") from None
        cap = rt.per_intent_cap[vl.intent_id]
        if cap > 0 and self.active_count(rt.client, rt.topology_id, vl.intent_id) >= cap:
            raise CapExceeded(vl.intent_id, cap)
        conn = Connection(
            f"conn-{self.next_id}", rt.client, rt.topology_id, vl.intent_id, vl.id, ACTIVE, seq
        )
        self.next_id += 1
        self.connections[conn.connection_id] = conn
        return conn

    def get(self, connection_id: str) -> Connection:
        conn = self.connections.get(connection_id)
        if conn is None:
            raise UnknownConnection(f"unknown connection {connection_id!r}")
        return conn

    def deactivate(self, connection_id: str) -> Connection:
        conn = self.get(connection_id)
        if conn.state == DELETED:
            raise AlreadyDeleted(f"connection {connection_id!r} is already deleted")
        conn.state = DELETED
        return conn
