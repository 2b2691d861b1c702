"""The hypervisor engine: installed topologies, connections and events.

One writer at a time. Every mutation works on a private copy of the state and
publishes it with a single reference swap, so readers holding the previous
state never see a half-applied change.
"""

from __future__ import annotations

import dataclasses
import threading
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence, TypeVar

from .._json import digest, dumps_canonical, loads_strict
from ..audit import full_audit
from ..errors import CorruptSnapshot, LumenError, RequestRejected, UnknownConnection, UnknownTopology
from ..intent import EndpointAssignment, TopologyRequest, validate_request
from ..phys import PhysicalTopology, adjacency_view, topology_to_json
from ..spectrum import DEFAULT_PROFILES, DEFAULT_SLOTS_PER_LINK, SpectrumPool, TransceiverProfile, check_profile_table
from ..view import (
    OBJECT_CREATED,
    OBJECT_DELETED,
    VALUE_CHANGED,
    Connection,
    ConnectionBook,
    Event,
    EventLog,
    link_summary,
    render_view,
    replay_inventory,
)
from ..vtc import ProviderConstraints, RealizedTopology, realize, replace, teardown

SNAPSHOT_FORMAT = "lumen-snapshot/1"
T = TypeVar("T")

TOPOLOGY = "topology"
VIRTUAL_LINK = "virtual-link"
CONNECTION = "connection"


@dataclass
class HypervisorState:
    pool: SpectrumPool
    topologies: dict[tuple[str, str], RealizedTopology]
    revisions: dict[tuple[str, str], int]
    connections: ConnectionBook
    events: EventLog

    def clone(self) -> "HypervisorState":
        # realized topologies and events are immutable; share them
        return HypervisorState(
            self.pool.copy(),
            dict(self.topologies),
            dict(self.revisions),
            ConnectionBook(
                [dataclasses.replace(c) for c in self.connections.connections.values()],
                self.connections.next_id,
            ),
            EventLog(self.events.events, self.events.high_water),
        )


def config_fingerprint(
    topo: PhysicalTopology,
    constraints: ProviderConstraints,
    table: Sequence[TransceiverProfile],
    slots_per_link: int,
) -> str:
    return digest(
        {
            "physical-topology": topology_to_json(topo),
            "constraints": constraints.to_json(),
            "profiles": [p.to_json() for p in table],
            "slots-per-link": slots_per_link,
        }
    )


class Hypervisor:
    """In-process engine behind the HTTP API."""

    def __init__(
        self,
        topo: PhysicalTopology,
        constraints: ProviderConstraints,
        table: Sequence[TransceiverProfile] = DEFAULT_PROFILES,
        slots_per_link: int = DEFAULT_SLOTS_PER_LINK,
        state: HypervisorState | None = None,
    ):
        violations = constraints.violations(topo)
        if violations:
            raise RequestRejected(violations)
        self.topo = topo
        self.graph = adjacency_view(topo)
        self.constraints = constraints
        self.table = tuple(check_profile_table(table))
        self.slots_per_link = slots_per_link
        self.fingerprint = config_fingerprint(topo, constraints, self.table, slots_per_link)
        self._state = state or HypervisorState(
            SpectrumPool(topo.links, slots_per_link), {}, {}, ConnectionBook(), EventLog()
        )
        self._writer = threading.Lock()

    # --- state plumbing ----------------------------------------------------

    @property
    def state(self) -> HypervisorState:
        """The current committed state. Treat as read-only."""
        return self._state

    def _mutate(self, fn: Callable[[HypervisorState], T]) -> T:
        with self._writer:
            work = self._state.clone()
            result = fn(work)
            self._state = work
            return result

    # --- reads ---------------------------------------------------------------

    def endpoints(self, client: str) -> EndpointAssignment:
        return self.constraints.assignment(client)

    def installed(self, client: str) -> list[TopologyRequest]:
        return [rt.request for (c, _), rt in self._state.topologies.items() if c == client]

    def topology(self, client: str, topology_id: str, state: HypervisorState | None = None) -> RealizedTopology:
        state = state or self._state
        rt = state.topologies.get((client, topology_id))
        if rt is None:
            raise UnknownTopology(f"no topology {topology_id!r} for client {client!r}")
        return rt

    def render(self, client: str, topology_id: str, full: bool = False) -> dict[str, Any]:
        hide = self.constraints.hide_interior and not full
        return render_view(self.topology(client, topology_id), hide_interior=hide)

    def poll_events(self, since_seq: int = 0, limit: int = 100, client: str | None = None) -> list[Event]:
        return self._state.events.poll(since_seq, limit, client)

    def connection(self, connection_id: str) -> Connection:
        return self._state.connections.get(connection_id)

    def inventory(self, state: HypervisorState | None = None) -> set[tuple[str, str, str]]:
        state = state or self._state
        out = set()
        for (client, tid), rt in state.topologies.items():
            out.add((client, TOPOLOGY, tid))
            out.update((client, VIRTUAL_LINK, vl.id) for vl in rt.virtual_links)
        out.update((c.client, CONNECTION, c.connection_id) for c in state.connections.active())
        return out

    def audit(self, state: HypervisorState | None = None) -> list[str]:
        state = state or self._state
        return full_audit(state.topologies, state.pool, self.topo, self.table)

    # --- mutations -----------------------------------------------------------

    def put_topology(self, client: str, request: TopologyRequest) -> tuple[RealizedTopology, bool]:
        """Install ``request``, or replace the client's topology with the same id.

        Returns the realized topology and whether it was newly created.
        """

        def apply(state: HypervisorState) -> tuple[RealizedTopology, bool]:
            key = (client, request.topology_id)
            mine = [tid for (c, tid) in state.topologies if c == client]
            old = state.topologies.get(key)
            if old is None:
                rt = realize(
                    request, client, self.topo, self.constraints, state.pool, self.table,
                    mine, state.events.high_water + 1, self.graph,
                )
                state.topologies[key] = rt
                state.revisions[key] = 1
                state.events.append(OBJECT_CREATED, TOPOLOGY, rt.topology_id, client, revision=1)
                for vl in rt.virtual_links:
                    state.events.append(OBJECT_CREATED, VIRTUAL_LINK, vl.id, client, **{"intent-id": vl.intent_id})
                return rt, True

            rt, pool = replace(
                old, request, self.topo, self.constraints, state.pool, self.table,
                mine, old.created_at, self.graph,
            )
            state.pool = pool
            self._close_connections(state, client, request.topology_id)
            old_links = {vl.id: link_summary(old, vl) for vl in old.virtual_links}
            new_links = {vl.id: link_summary(rt, vl) for vl in rt.virtual_links}
            for link_id in old_links:
                if link_id not in new_links:
                    state.events.append(OBJECT_DELETED, VIRTUAL_LINK, link_id, client)
            for link_id, summary in new_links.items():
                before = old_links.get(link_id)
                if before is None:
                    state.events.append(OBJECT_CREATED, VIRTUAL_LINK, link_id, client, **{"intent-id": summary["intent-id"]})
                    continue
                for name, value in summary.items():
                    if before[name] != value:
                        state.events.append(
                            VALUE_CHANGED, VIRTUAL_LINK, link_id, client, field=name, old=before[name], new=value
                        )
            revision = state.revisions[key] + 1
            state.events.append(
                VALUE_CHANGED, TOPOLOGY, request.topology_id, client,
                field="revision", old=state.revisions[key], new=revision,
            )
            state.revisions[key] = revision
            state.topologies[key] = rt
            return rt, False

        return self._mutate(apply)

    def _close_connections(self, state: HypervisorState, client: str, topology_id: str) -> None:
        for conn in state.connections.active(client, topology_id):
            state.connections.deactivate(conn.connection_id)
            state.events.append(OBJECT_DELETED, CONNECTION, conn.connection_id, client)

    def delete_topology(self, client: str, topology_id: str, force: bool = False) -> None:
        def apply(state: HypervisorState) -> None:
            rt = self.topology(client, topology_id, state)
            active = state.connections.active(client, topology_id)
            teardown(rt, state.pool, len(active), force)
            self._close_connections(state, client, topology_id)
            for vl in rt.virtual_links:
                state.events.append(OBJECT_DELETED, VIRTUAL_LINK, vl.id, client)
            state.events.append(OBJECT_DELETED, TOPOLOGY, topology_id, client)
            del state.topologies[(client, topology_id)]
            del state.revisions[(client, topology_id)]

        self._mutate(apply)

    def activate(self, client: str, topology_id: str, virtual_link_id: str) -> Connection:
        def apply(state: HypervisorState) -> Connection:
            rt = self.topology(client, topology_id, state)
            conn = state.connections.activate(rt, virtual_link_id, state.events.high_water + 1)
            state.events.append(
                OBJECT_CREATED, CONNECTION, conn.connection_id, client,
                **{"topology-id": topology_id, "virtual-link-id": virtual_link_id},
            )
            return dataclasses.replace(conn)

        return self._mutate(apply)

    def deactivate(self, connection_id: str, client: str | None = None) -> None:
        def apply(state: HypervisorState) -> None:
            conn = state.connections.get(connection_id)
            if client is not None and conn.client != client:
                raise UnknownConnection(f"unknown connection {connection_id!r}")
            state.connections.deactivate(connection_id)
            state.events.append(OBJECT_DELETED, CONNECTION, connection_id, conn.client)

        self._mutate(apply)

    # --- persistence -----------------------------------------------------------

    def snapshot_json(self, state: HypervisorState | None = None) -> dict[str, Any]:
        state = state or self._state
        return {
            "format": SNAPSHOT_FORMAT,
            "config-fingerprint": self.fingerprint,
            "pool": state.pool.to_json(),
            "topologies": [
                {"revision": state.revisions[key], "realized": rt.to_json()}
                for key, rt in state.topologies.items()
            ],
            "connections": [c.to_json() for c in state.connections.connections.values()],
            "next-connection": state.connections.next_id,
            "events": [e.to_json() for e in state.events.events],
            "event-high-water": state.events.high_water,
        }

    def save_snapshot(self) -> bytes:
        return dumps_canonical(self.snapshot_json())

    def state_hash(self) -> str:
        return digest(self.snapshot_json())

    def spectrum_hash(self) -> str:
        return self._state.pool.occupancy_hash()

    @classmethod
    def load_snapshot(
        cls,
        document: bytes,
        topo: PhysicalTopology,
        constraints: ProviderConstraints,
        table: Sequence[TransceiverProfile] = DEFAULT_PROFILES,
        slots_per_link: int = DEFAULT_SLOTS_PER_LINK,
    ) -> "Hypervisor":
        """Rebuild a hypervisor from :meth:`save_snapshot` output.

        Raises:
            CorruptSnapshot: naming the check that failed.
        """
        engine = cls(topo, constraints, table, slots_per_link)
        try:
            raw = loads_strict(document)
        except LumenError as exc:
            raise CorruptSnapshot("decode", str(exc)) from None
        if not isinstance(raw, dict) or raw.get("format") != SNAPSHOT_FORMAT:
            raise CorruptSnapshot("format", "not a snapshot document")
        if raw.get("config-fingerprint") != engine.fingerprint:
            raise CorruptSnapshot("fingerprint", "snapshot was written under a different configuration")
        try:
            state = _state_from_json(raw)
        except (KeyError, TypeError, ValueError, LumenError) as exc:
            raise CorruptSnapshot("schema", f"{type(exc).__name__}: {exc}") from None
        engine._check_state(state)
        engine._state = state
        return engine

    def _check_state(self, state: HypervisorState) -> None:
        pool = state.pool
        if pool.slots_per_link != self.slots_per_link or set(pool.links) != set(self.topo.links):
            raise CorruptSnapshot("spectrum", "link set or grid size differs from the configuration")
        if pool.rebuild_from_tokens().links != pool.links:
            raise CorruptSnapshot("spectrum", "occupancy does not match the live reservation tokens")
        for (client, tid), rt in state.topologies.items():
            if rt.client != client or rt.topology_id != tid:
                raise CorruptSnapshot("topology", f"misfiled topology {client}/{tid}")
            violations = validate_request(rt.request, self.constraints.assignment(client))
            if violations:
                raise CorruptSnapshot("topology", f"{tid}: {violations[0]}")
        problems = self.audit(state)
        if problems:
            raise CorruptSnapshot("audit", problems[0])
        for conn in state.connections.active():
            rt = state.topologies.get((conn.client, conn.topology_id))
            if rt is None or conn.virtual_link_id not in {vl.id for vl in rt.virtual_links}:
                raise CorruptSnapshot("connections", f"{conn.connection_id} references a missing link")
        for (client, tid), rt in state.topologies.items():
            for intent_id, cap in rt.per_intent_cap.items():
                if cap and state.connections.active_count(client, tid, intent_id) > cap:
                    raise CorruptSnapshot("connections", f"{tid}/{intent_id} exceeds its cap")
        seqs = [e.seq for e in state.events.events]
        if seqs and seqs != list(range(seqs[0], seqs[0] + len(seqs))):
            raise CorruptSnapshot("events", "sequence numbers are not gap-free")
        if seqs and state.events.high_water < seqs[-1]:
            raise CorruptSnapshot("events", "high-water mark below the last event")
        try:
            replayed = replay_inventory(state.events.events)
        except ValueError as exc:
            raise CorruptSnapshot("events", str(exc)) from None
        if replayed != self.inventory(state):
            raise CorruptSnapshot("events", "event log does not reproduce the inventory")


def _state_from_json(raw: Mapping[str, Any]) -> HypervisorState:
    pool = SpectrumPool.from_json(raw["pool"])
    topologies: dict[tuple[str, str], RealizedTopology] = {}
    revisions: dict[tuple[str, str], int] = {}
    for item in raw["topologies"]:
        rt = RealizedTopology.from_json(item["realized"])
        key = (rt.client, rt.topology_id)
        if key in topologies:
            raise ValueError(f"topology {key} stored twice")
        topologies[key] = rt
        revisions[key] = int(item["revision"])
    connections = ConnectionBook(
        [Connection.from_json(c) for c in raw["connections"]], int(raw["next-connection"])
    )
    events = EventLog([Event.from_json(e) for e in raw["events"]], int(raw["event-high-water"]))
    return HypervisorState(pool, topologies, revisions, connections, events)

