import json

import pytest
from conftest import MINIMAL_DOC
from oracles import simple_paths

from lumen.errors import DanglingReference, DuplicateId, InvalidAttachment, InvalidTopology, MalformedDocument
from lumen.pathcomp import shortest_path
from lumen.phys import (
    Attachment,
    FiberLink,
    PhysicalTopology,
    PhysNode,
    adjacency_view,
    parse_physical_topology,
    serialize_physical_topology,
    validate_topology,
)


def _doc(**overrides):
    doc = json.loads(MINIMAL_DOC)
    doc.update(overrides)
    return json.dumps(doc)


def test_empty_document_is_valid():
    t = parse_physical_topology(b'{"nodes": [], "links": [], "endpoints": []}')
    assert (t.nodes, t.links, t.endpoints) == ({}, {}, {})
    assert validate_topology(t) == []


def test_minimal_two_node_topology():
    t = parse_physical_topology(MINIMAL_DOC)
    assert len(t.nodes) == 2 and len(t.links) == 1 and len(t.endpoints) == 1
    assert t.endpoints["A1"] == Attachment("T1", "c1")
    assert validate_topology(t) == []


def test_dangling_node_reference():
    doc = json.loads(MINIMAL_DOC)
    doc["links"][0]["b"]["node"] = "Rx"
    with pytest.raises(DanglingReference):
        parse_physical_topology(json.dumps(doc))


@pytest.mark.parametrize(
    "text",
    [b"not json", b"[]", b'{"nodes": []}', b'{"nodes": {}, "links": [], "endpoints": []}'],
)
def test_malformed_documents(text):
    with pytest.raises(MalformedDocument):
        parse_physical_topology(text)


def test_duplicate_node_id():
    doc = json.loads(MINIMAL_DOC)
    doc["nodes"].append({"id": "R1", "kind": "roadm", "tps": ["x"]})
    with pytest.raises(DuplicateId):
        parse_physical_topology(json.dumps(doc))


def test_endpoint_on_roadm_is_rejected():
    doc = json.loads(MINIMAL_DOC)
    doc["endpoints"][0].update(node="R1", tp="d1")
    with pytest.raises(InvalidAttachment):
        parse_physical_topology(json.dumps(doc))


def test_unknown_key_rejected():
    doc = json.loads(MINIMAL_DOC)
    doc["nodes"][0]["colour"] = "red"
    with pytest.raises(MalformedDocument):
        parse_physical_topology(json.dumps(doc))


def _minimal_value(**node_kw):
    r1 = PhysNode("R1", "roadm", ("d1", "d2"), node_kw.get("connectivity"))
    return PhysicalTopology(
        nodes={"T1": PhysNode("T1", "terminal", ("c1",), None), "R1": r1},
        links={"L1": FiberLink("L1", Attachment("T1", "c1"), Attachment("R1", "d1"), 10.0)},
        endpoints={"A1": Attachment("T1", "c1")},
    )


def test_irreflexivity_violation():
    t = _minimal_value(connectivity=frozenset({("d1", "d1")}))
    assert [v.rule for v in validate_topology(t)] == ["Irreflexivity"]
    assert validate_topology(t)[0].subject == "R1" and validate_topology(t)[0].detail == "d1"


def test_asymmetric_matrix_flagged():
    t = _minimal_value(connectivity=frozenset({("d1", "d2")}))
    assert [v.rule for v in validate_topology(t)] == ["Asymmetry"]


def test_tp_reuse_flagged():
    t = _minimal_value()
    t.links["L2"] = FiberLink("L2", Attachment("T1", "c1"), Attachment("R1", "d2"), 5.0)
    assert [v.rule for v in validate_topology(t)] == ["TpReuse"]


def test_parser_rejects_what_validator_flags():
    doc = json.loads(MINIMAL_DOC)
    doc["links"][0]["length-km"] = -1
    with pytest.raises(InvalidTopology):
        parse_physical_topology(json.dumps(doc))


def test_roundtrip_is_identity(data_dir):
    for name in ("six_node.json", "ring_single_homed.json"):
        once = parse_physical_topology((data_dir / name).read_bytes())
        twice = parse_physical_topology(serialize_physical_topology(once))
        assert once == twice
        assert serialize_physical_topology(twice) == serialize_physical_topology(once)


def test_adjacency_counts(six_node):
    g = adjacency_view(six_node)
    assert len(g.nodes) == len(six_node.nodes)
    assert g.edge_count() == len(six_node.links)


def test_adjacency_of_minimal():
    g = adjacency_view(parse_physical_topology(MINIMAL_DOC))
    assert g.nodes == ("R1", "T1")
    assert [e.weight for e in g.edges.values()] == [10.0]


def test_invalid_topology_has_no_view():
    with pytest.raises(InvalidTopology):
        adjacency_view(_minimal_value(connectivity=frozenset({("d1", "d1")})))


def test_triangle_of_roadms():
    nodes = {n: PhysNode(n, "roadm", ("x", "y"), None) for n in "ABC"}
    links = {
        "AB": FiberLink("AB", Attachment("A", "x"), Attachment("B", "y"), 1.0),
        "BC": FiberLink("BC", Attachment("B", "x"), Attachment("C", "y"), 2.0),
        "CA": FiberLink("CA", Attachment("C", "x"), Attachment("A", "y"), 3.0),
    }
    g = adjacency_view(PhysicalTopology(nodes, links, {}))
    assert sorted((e.link, e.weight) for e in g.edges.values()) == [("AB", 1.0), ("BC", 2.0), ("CA", 3.0)]


def test_forbidden_transit_is_avoided():
    # X-R-Y is short but R forbids d1<->d2; the detour through S is the only legal route
    doc = {
        "nodes": [
            {"id": "X", "kind": "roadm", "tps": ["a", "b"]},
            {"id": "Y", "kind": "roadm", "tps": ["a", "b"]},
            {"id": "R", "kind": "roadm", "tps": ["d1", "d2", "d3"],
             "connectivity": [["d1", "d3"], ["d3", "d1"], ["d2", "d3"], ["d3", "d2"]]},
            {"id": "S", "kind": "roadm", "tps": ["a", "b"]},
        ],
        "links": [
            {"id": "XR", "a": {"node": "X", "tp": "a"}, "b": {"node": "R", "tp": "d1"}, "length-km": 1},
            {"id": "RY", "a": {"node": "R", "tp": "d2"}, "b": {"node": "Y", "tp": "a"}, "length-km": 1},
            {"id": "XS", "a": {"node": "X", "tp": "b"}, "b": {"node": "S", "tp": "a"}, "length-km": 5},
            {"id": "SY", "a": {"node": "S", "tp": "b"}, "b": {"node": "Y", "tp": "b"}, "length-km": 5},
            {"id": "RS", "a": {"node": "R", "tp": "d3"}, "b": {"node": "S", "tp": "b2"}, "length-km": 1},
        ],
        "endpoints": [],
    }
    doc["nodes"][3]["tps"].append("b2")
    g = adjacency_view(parse_physical_topology(json.dumps(doc)))
    assert g.edge_count() == 5
    legal = simple_paths(g, "X", "Y")
    assert all("XR" not in links or "RY" not in links for _, _, links in legal)
    best = min(legal)
    p = shortest_path(g, "X", "Y")
    assert (p.cost, p.links) == (best[0], best[2])
    assert "RY" not in p.links or "XR" not in p.links
