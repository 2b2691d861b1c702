from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lumen.intent import decode_state  # noqa: E402
from lumen.phys import load_physical_topology  # noqa: E402
from lumen.vtc import parse_constraints  # noqa: E402

DATA = Path(str(resources.files("lumen") / "data"))

MINIMAL_DOC = b"""{
  "nodes": [
    {"id": "T1", "kind": "terminal", "tps": ["c1"]},
    {"id": "R1", "kind": "roadm", "tps": ["d1"]}
  ],
  "links": [{"id": "L1", "a": {"node": "T1", "tp": "c1"}, "b": {"node": "R1", "tp": "d1"}, "length-km": 10}],
  "endpoints": [{"endpoint-id": "A1", "node": "T1", "tp": "c1"}]
}"""


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def six_node():
    return load_physical_topology(DATA / "six_node.json")


@pytest.fixture
def ring():
    return load_physical_topology(DATA / "ring_single_homed.json")


@pytest.fixture
def constraints():
    return parse_constraints((DATA / "six_node_constraints.json").read_bytes())


@pytest.fixture
def client_a_doc() -> bytes:
    return (DATA / "client_a_state.json").read_bytes()


@pytest.fixture
def client_a_request(client_a_doc):
    return decode_state(client_a_doc)[1][0]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, ok, elapsed = RESULTS[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title} ({elapsed:.3f}s)")
