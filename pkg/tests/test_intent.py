import json

import jsonschema
import pytest

from lumen._json import strip_whitespace
from lumen.errors import DuplicateKey, MalformedDocument, SchemaViolation
from lumen.intent import (
    EndpointAssignment,
    IntentSpec,
    TopologyRequest,
    decode_request,
    decode_state,
    encode_request,
    encode_state,
    validate_request,
)
from lumen.pathcomp import DisjointMode


def _topology(**intent_overrides):
    intent = {
        "intent-id": "Intent A",
        "endpoints": ["A1", "A2", "A3"],
        "dedicated-bandwidth": 10000,
        "flexible-bandwidth": 5000,
        "minimum-paths": 2,
        "disjoint-paths": "link",
        "protection": False,
        "maximum-active-connections": 2,
    }
    intent.update(intent_overrides)
    return {"topology-id": "Client A", "intents": [intent]}


def test_client_a_values(client_a_doc):
    subtree = json.dumps({"topologies": json.loads(client_a_doc)["topologies"]})
    request = decode_request(subtree)
    assert request == TopologyRequest(
        "Client A",
        (
            IntentSpec(
                intent_id="Intent A",
                endpoints=("A1", "A2", "A3"),
                dedicated_bandwidth_mbps=10000,
                flexible_bandwidth_mbps=5000,
                minimum_paths=2,
                disjoint_paths=DisjointMode.LINK,
                protection=False,
                maximum_active_connections=2,
            ),
        ),
    )


def test_client_a_reencodes_byte_for_byte(client_a_doc):
    assigned, installed = decode_state(client_a_doc)
    out = encode_state(EndpointAssignment("Client A", tuple(assigned)), installed)
    assert strip_whitespace(out) == strip_whitespace(client_a_doc)
    assert out.startswith(b'{\n  "endpoints": {\n    "assigned-endpoints": [')


def test_empty_state():
    out = encode_state(EndpointAssignment("nobody"), [])
    assert json.loads(out) == {"endpoints": {"assigned-endpoints": []}, "topologies": {"installed-topologies": []}}


def test_zero_minimum_paths_names_the_path():
    with pytest.raises(SchemaViolation) as err:
        decode_request(json.dumps(_topology(**{"minimum-paths": 0})))
    assert err.value.path == ".intents[0].minimum-paths"


def test_duplicate_intent_ids():
    doc = _topology()
    doc["intents"].append(dict(doc["intents"][0]))
    with pytest.raises(DuplicateKey):
        decode_request(json.dumps(doc))


def test_duplicate_json_key():
    with pytest.raises(DuplicateKey):
        decode_request('{"topology-id": "x", "topology-id": "y", "intents": []}')


@pytest.mark.parametrize(
    "overrides, where",
    [
        ({"colour": "red"}, ".intents[0].colour"),
        ({"protection": "yes"}, ".intents[0].protection"),
        ({"disjoint-paths": "srlg"}, ".intents[0].disjoint-paths"),
        ({"dedicated-bandwidth": 1.5}, ".intents[0].dedicated-bandwidth"),
        ({"dedicated-bandwidth": True}, ".intents[0].dedicated-bandwidth"),
        ({"maximum-active-connections": -1}, ".intents[0].maximum-active-connections"),
        ({"endpoints": ["A1"]}, ".intents[0].endpoints"),
    ],
)
def test_schema_violations(overrides, where):
    with pytest.raises(SchemaViolation) as err:
        decode_request(json.dumps(_topology(**overrides)))
    assert err.value.path == where


def test_missing_field():
    doc = _topology()
    del doc["intents"][0]["protection"]
    with pytest.raises(SchemaViolation) as err:
        decode_request(json.dumps(doc))
    assert err.value.path == ".intents[0].protection"


def test_not_json():
    with pytest.raises(MalformedDocument):
        decode_request(b"{")


def test_roundtrip_law():
    for overrides in ({}, {"disjoint-paths": "none", "protection": True}, {"flexible-bandwidth": 0}):
        first = decode_request(json.dumps(_topology(**overrides)))
        assert decode_request(encode_request(first)) == first


def test_validate_against_assignment(client_a_request):
    assert validate_request(client_a_request, EndpointAssignment("Client A", ("A1", "A2", "A3"))) == []
    problems = validate_request(client_a_request, EndpointAssignment("Client A", ("A1", "A2")))
    assert [(v.rule, v.subject) for v in problems] == [("UnassignedEndpoint", "A3")]


def test_zero_bandwidth_is_a_violation():
    request = decode_request(json.dumps(_topology(**{"dedicated-bandwidth": 0, "flexible-bandwidth": 0})))
    problems = validate_request(request, EndpointAssignment("Client A", ("A1", "A2", "A3")))
    assert [v.rule for v in problems] == ["ZeroBandwidth"]


def test_violations_in_document_order():
    doc = _topology(**{"endpoints": ["A9", "A8"]})
    second = dict(doc["intents"][0], **{"intent-id": "Intent B", "endpoints": ["A7", "A1"]})
    doc["intents"].append(second)
    problems = validate_request(decode_request(json.dumps(doc)), EndpointAssignment("c", ("A1",)))
    assert [v.subject for v in problems] == ["A9", "A8", "A7"]


def test_published_schema_agrees(data_dir, client_a_doc):
    schema = json.loads((data_dir / "intent.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    jsonschema.validate(json.loads(client_a_doc), schema)
    bad = json.loads(client_a_doc)
    bad["topologies"]["installed-topologies"][0]["intents"][0]["minimum-paths"] = 0
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
