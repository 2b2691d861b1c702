"""
Driving the hypervisor over HTTP
================================

Start the API on a free port, install Client A's topology, open connections
up to the intent's cap, follow the event log, then restart from the snapshot.
"""

import json
import shutil
import tempfile
import threading
from importlib import resources
from pathlib import Path
from urllib.error import HTTPError
from urllib.request import Request, urlopen

from lumen.service import ServiceConfig
from lumen.service.http import serve


def call(url, method="GET", body=None):
    req = Request(url, data=None if body is None else json.dumps(body).encode(), method=method)
    req.add_header("X-Client-Id", "Client A")
    try:
        with urlopen(req) as resp:
            raw = resp.read()
            return resp.status, json.loads(raw) if raw else None
    except HTTPError as exc:
        return exc.code, json.loads(exc.read())


def start(config):
    ready, stop, box = threading.Event(), threading.Event(), {}
    thread = threading.Thread(target=serve, args=(config, lambda s: (box.update(s=s), ready.set()), stop))
    thread.start()
    ready.wait()
    return box["s"], stop, thread


data = resources.files("lumen") / "data"
work = Path(tempfile.mkdtemp())
for name in ("six_node.json", "six_node_constraints.json", "client_a_state.json"):
    shutil.copy(data / name, work / name)
(work / "lumen.json").write_text(json.dumps({
    "physical-topology": "six_node.json",
    "provider-constraints": "six_node_constraints.json",
    "port": 0,
    "snapshot": "lumen.snapshot",
}))
config = ServiceConfig.load(work / "lumen.json")

server, stop, thread = start(config)
base = server.url
print("listening on", base)
print(call(base + "/restconf/data/endpoints")[1])

body = json.loads((work / "client_a_state.json").read_text())["topologies"]["installed-topologies"][0]
status, view = call(base + "/restconf/data/topologies/topology=Client%20A", "PUT", body)
print("PUT ->", status, [link["link-id"] for link in view["links"]])

# maximum-active-connections is 2: the third activation is refused
for link in view["links"]:
    status, reply = call(base + "/views/topology=Client%20A/connections", "POST", {"virtual-link-id": link["link-id"]})
    print("activate", link["link-id"], "->", status, reply.get("connection-id") or reply["error"])

for event in call(base + "/events?since=0")[1]["events"]:
    print(f"  #{event['seq']:<3} {event['kind']:15s} {event['object-type']:13s} {event['object-id']}")

before = server.engine.state_hash()
stop.set()
thread.join()

server, stop, thread = start(config)
print("state restored from snapshot:", server.engine.state_hash() == before)
stop.set()
thread.join()
shutil.rmtree(work)
