import json
import random
import threading

import pytest
from netgen import TWO_CLIENTS, random_request, ten_node_network

from lumen.errors import (
    ActiveConnectionsExist,
    CapExceeded,
    CorruptSnapshot,
    LumenError,
    UnknownConnection,
    UnknownTopology,
)
from lumen.intent import IntentSpec, TopologyRequest
from lumen.pathcomp import DisjointMode
from lumen.service import Hypervisor
from lumen.spectrum import SpectrumPool
from lumen.view import replay_inventory
from lumen.vtc import parse_constraints, realize


@pytest.fixture
def engine(six_node, constraints):
    return Hypervisor(six_node, constraints)


def _kinds(events):
    return [(e.kind, e.object_type, e.object_id) for e in events]


def test_install_emits_events_in_order(engine, client_a_request):
    rt, created = engine.put_topology("Client A", client_a_request)
    assert created
    assert _kinds(engine.poll_events()) == [
        ("object-created", "topology", "Client A"),
        ("object-created", "virtual-link", "Client A/Intent A/A1-A2"),
        ("object-created", "virtual-link", "Client A/Intent A/A1-A3"),
        ("object-created", "virtual-link", "Client A/Intent A/A2-A3"),
    ]
    assert engine.poll_events(4) == []


def test_engine_matches_direct_module_call(engine, six_node, constraints, client_a_request):
    engine.put_topology("Client A", client_a_request)
    pool = SpectrumPool(six_node.links)
    rt = realize(client_a_request, "Client A", six_node, constraints, pool, created_at=1)
    assert engine.spectrum_hash() == pool.occupancy_hash()
    assert engine.topology("Client A", "Client A") == rt


def test_topologies_scoped_by_client(six_node, client_a_request):
    cons = parse_constraints(
        '{"assignments": [{"client": "Client A", "endpoints": ["A1", "A2", "A3"]}, {"client": "Other", "endpoints": []}]}'
    )
    engine = Hypervisor(six_node, cons)
    engine.put_topology("Client A", client_a_request)
    assert engine.installed("Other") == []
    with pytest.raises(UnknownTopology):
        engine.render("Other", "Client A")


def test_replace_emits_value_changed_on_shortfall_flip(six_node, constraints):
    engine = Hypervisor(six_node, constraints, slots_per_link=2)
    base = IntentSpec("I", ("A1", "A2"), 100000, 0, 1, DisjointMode.NONE, False, 0)
    engine.put_topology("Client A", TopologyRequest("t", (base,)))
    mark = engine.state.events.latest()
    flexible = IntentSpec("I", ("A1", "A2"), 100000, 5000, 1, DisjointMode.NONE, False, 0)
    _, created = engine.put_topology("Client A", TopologyRequest("t", (flexible,)))
    assert not created
    changed = {(e.detail["field"], e.detail["old"], e.detail["new"]) for e in engine.poll_events(mark)}
    assert ("flexible-shortfall", False, True) in changed
    assert ("revision", 1, 2) in changed


def test_failed_mutation_changes_nothing(engine, client_a_request):
    engine.put_topology("Client A", client_a_request)
    before = engine.state_hash()
    bad = TopologyRequest("Client A", (IntentSpec("I", ("A1", "A2"), 1, 0, 5, DisjointMode.LINK, False, 0),))
    with pytest.raises(LumenError):
        engine.put_topology("Client A", bad)
    assert engine.state_hash() == before


def test_delete_needs_force_with_connections(engine, client_a_request):
    engine.put_topology("Client A", client_a_request)
    link = engine.topology("Client A", "Client A").virtual_links[0].id
    conn = engine.activate("Client A", "Client A", link)
    with pytest.raises(ActiveConnectionsExist):
        engine.delete_topology("Client A", "Client A")
    engine.delete_topology("Client A", "Client A", force=True)
    assert engine.connection(conn.connection_id).state == "deleted"
    assert engine.state.pool.live == {}
    assert replay_inventory(engine.state.events.events) == set()


def test_deactivate_checks_owner(engine, client_a_request):
    engine.put_topology("Client A", client_a_request)
    link = engine.topology("Client A", "Client A").virtual_links[0].id
    conn = engine.activate("Client A", "Client A", link)
    with pytest.raises(UnknownConnection):
        engine.deactivate(conn.connection_id, client="Someone")
    engine.deactivate(conn.connection_id, client="Client A")


def test_cap_enforced_through_engine(engine, client_a_request):
    engine.put_topology("Client A", client_a_request)
    links = [vl.id for vl in engine.topology("Client A", "Client A").virtual_links]
    engine.activate("Client A", "Client A", links[0])
    engine.activate("Client A", "Client A", links[0])
    with pytest.raises(CapExceeded):
        engine.activate("Client A", "Client A", links[1])


def test_snapshot_roundtrip(engine, six_node, constraints, client_a_request):
    empty = Hypervisor.load_snapshot(engine.save_snapshot(), six_node, constraints)
    assert empty.state_hash() == engine.state_hash()
    engine.put_topology("Client A", client_a_request)
    engine.activate("Client A", "Client A", "Client A/Intent A/A1-A2")
    again = Hypervisor.load_snapshot(engine.save_snapshot(), six_node, constraints)
    assert again.state_hash() == engine.state_hash()
    assert again.spectrum_hash() == engine.spectrum_hash()
    assert again.state.events.high_water == engine.state.events.high_water


@pytest.mark.parametrize(
    "mangle, validator",
    [
        (lambda b: b[: len(b) // 2], "decode"),
        (lambda b: b.replace(b'"lumen-snapshot/1"', b'"other/9"'), "format"),
        (lambda b: b.replace(b'"next-connection":2', b'"next-connection":"x"'), "schema"),
    ],
)
def test_corrupt_snapshots(engine, six_node, constraints, client_a_request, mangle, validator):
    engine.put_topology("Client A", client_a_request)
    engine.activate("Client A", "Client A", "Client A/Intent A/A1-A2")
    with pytest.raises(CorruptSnapshot) as err:
        Hypervisor.load_snapshot(mangle(engine.save_snapshot()), six_node, constraints)
    assert err.value.validator == validator


def test_snapshot_fingerprint_mismatch(engine, six_node, constraints):
    with pytest.raises(CorruptSnapshot) as err:
        Hypervisor.load_snapshot(engine.save_snapshot(), six_node, constraints, slots_per_link=100)
    assert err.value.validator == "fingerprint"


def test_tampered_spectrum_detected(engine, six_node, constraints, client_a_request):
    engine.put_topology("Client A", client_a_request)
    doc = json.loads(engine.save_snapshot())
    doc["pool"]["links"]["F-R1-R2"]["dedicated"]["300"] = "intruder"
    with pytest.raises(CorruptSnapshot) as err:
        Hypervisor.load_snapshot(json.dumps(doc).encode(), six_node, constraints)
    assert err.value.validator == "spectrum"


def test_event_gap_detected(engine, six_node, constraints, client_a_request):
    engine.put_topology("Client A", client_a_request)
    doc = json.loads(engine.save_snapshot())
    del doc["events"][1]
    with pytest.raises(CorruptSnapshot) as err:
        Hypervisor.load_snapshot(json.dumps(doc).encode(), six_node, constraints)
    assert err.value.validator == "events"


def test_readers_never_see_partial_state():
    topo = ten_node_network(2)
    engine = Hypervisor(topo, TWO_CLIENTS, slots_per_link=48)
    stop = threading.Event()
    problems: list[str] = []

    def reader():
        while not stop.is_set():
            state = engine.state
            problems.extend(engine.audit(state))
            if replay_inventory(state.events.events) != engine.inventory(state):
                problems.append("inventory mismatch")

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    rng = random.Random(11)
    try:
        for n in range(60):
            try:
                engine.put_topology("A", random_request(rng, ["E1", "E3", "E5", "E7"], f"t{n % 5}"))
            except LumenError:
                pass
    finally:
        stop.set()
        for t in threads:
            t.join()
    assert problems == []
