"""RESTCONF-flavoured HTTP/JSON front end for :class:`Hypervisor`.

Routes (the client is identified by the ``X-Client-Id`` header)::

    GET    /restconf/data/endpoints
    GET    /restconf/data/topologies
    PUT    /restconf/data/topologies/topology={id}
    DELETE /restconf/data/topologies/topology={id}[?force=true]
    GET    /views/topology={id}[?full=true]
    POST   /views/topology={id}/connections
    DELETE /connections/{connection-id}
    GET    /events?since={seq}&limit={n}

The URL layout is this project's own; it is not a standard RESTCONF mapping.
"""

from __future__ import annotations

import logging
import re
import signal
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable
from urllib.parse import parse_qs, unquote, urlsplit

from .._json import dumps_pretty, loads_strict
from ..errors import (
    ActiveConnectionsExist,
    AlreadyDeleted,
    AlreadyInstalled,
    BindFailure,
    CapExceeded,
    DuplicateKey,
    InfeasiblePaths,
    InsufficientSpectrum,
    LumenError,
    MalformedDocument,
    NoFeasibleProfile,
    RequestRejected,
    SchemaViolation,
    UnknownConnection,
    UnknownLink,
    UnknownTopology,
)
from ..intent import endpoints_json, request_from_json, topologies_json
from .config import ServiceConfig, build_engine, write_atomic
from .hypervisor import Hypervisor

log = logging.getLogger(__name__)

CLIENT_HEADER = "X-Client-Id"
MAX_BODY = 1 << 20

_STATUS: list[tuple[type, HTTPStatus]] = [
    ((SchemaViolation, DuplicateKey, MalformedDocument, RequestRejected), HTTPStatus.BAD_REQUEST),
    ((UnknownTopology, UnknownLink, UnknownConnection), HTTPStatus.NOT_FOUND),
    (
        (
            InfeasiblePaths,
            InsufficientSpectrum,
            NoFeasibleProfile,
            ActiveConnectionsExist,
            CapExceeded,
            AlreadyDeleted,
            AlreadyInstalled,
        ),
        HTTPStatus.CONFLICT,
    ),
]

_TOPOLOGY = re.compile(r"^/restconf/data/topologies/topology=([^/]+)$")
_VIEW = re.compile(r"^/views/topology=([^/]+)$")
_CONNECTIONS = re.compile(r"^/views/topology=([^/]+)/connections$")
_CONNECTION = re.compile(r"^/connections/([^/]+)$")


class HttpError(Exception):
    def __init__(self, status: HTTPStatus, body: dict[str, Any]):
        self.status = status
        self.body = body


def status_for(exc: LumenError) -> HTTPStatus:
    for classes, status in _STATUS:
        if isinstance(exc, classes):
            return status
    return HTTPStatus.INTERNAL_SERVER_ERROR


def _flag(query: dict[str, list[str]], name: str) -> bool:
    if name not in query:
        return False
    value = query[name][-1].lower()
    return value in ("", "1", "true", "yes")


class LumenServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], engine: Hypervisor, snapshot: Path | None = None):
        self.engine = engine
        self.snapshot = snapshot
        self._persist_lock = threading.Lock()
        super().__init__(address, LumenHandler)

    def persist(self) -> None:
        if self.snapshot is None:
            return
        with self._persist_lock:
            # always write the newest committed state, whichever thread gets here
            write_atomic(self.snapshot, self.engine.save_snapshot())

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"


class LumenHandler(BaseHTTPRequestHandler):
    server: LumenServer
    protocol_version = "HTTP/1.1"

    def log_message(self, format: str, *args: Any) -> None:
        log.debug("%s - %s", self.address_string(), format % args)

    # --- plumbing ----------------------------------------------------------

    def _send(self, status: HTTPStatus, body: Any = None) -> None:
        data = b"" if body is None else dumps_pretty(body)
        self.send_response(status)
        if body is not None:
            self.send_header("Content-Type", "application/yang-data+json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        if data:
            self.wfile.write(data)

    def _client(self) -> str:
        client = self.headers.get(CLIENT_HEADER)
        if not client:
            raise HttpError(
                HTTPStatus.BAD_REQUEST,
                {"error": "MissingClient", "message": f"{CLIENT_HEADER} header required"},
            )
        return client

    def _body(self) -> Any:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY:
            raise HttpError(HTTPStatus.REQUEST_ENTITY_TOO_LARGE, {"error": "BodyTooLarge"})
        return loads_strict(self.rfile.read(length) if length else b"")

    def _dispatch(self, method: str) -> None:
        parts = urlsplit(self.path)
        path = parts.path.rstrip("/") or "/"
        query = parse_qs(parts.query, keep_blank_values=True)
        try:
            handler = self._route(method, path)
            if handler is None:
                raise HttpError(HTTPStatus.NOT_FOUND, {"error": "NoRoute", "message": f"{method} {path}"})
            status, body = handler(query)
        except HttpError as exc:
            status, body = exc.status, exc.body
        except LumenError as exc:
            status, body = status_for(exc), exc.payload()
        except Exception:  # pragma: no cover - defensive
            log.exception("unhandled error on %s %s", method, self.path)
            status, body = HTTPStatus.INTERNAL_SERVER_ERROR, {"error": "Internal"}
        self._send(status, body)

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_PUT(self) -> None:
        self._dispatch("PUT")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_DELETE(self) -> None:
        self._dispatch("DELETE")

    def _route(self, method: str, path: str) -> Callable | None:
        if path == "/restconf/data/endpoints" and method == "GET":
            return self.get_endpoints
        if path == "/restconf/data/topologies" and method == "GET":
            return self.get_topologies
        if path == "/events" and method == "GET":
            return self.get_events
        for pattern, routes in (
            (_TOPOLOGY, {"PUT": self.put_topology, "DELETE": self.delete_topology}),
            (_VIEW, {"GET": self.get_view}),
            (_CONNECTIONS, {"POST": self.post_connection}),
            (_CONNECTION, {"DELETE": self.delete_connection}),
        ):
            m = pattern.match(path)
            if m and method in routes:
                ident = unquote(m.group(1))
                return lambda query, fn=routes[method]: fn(ident, query)
        return None

    # --- routes ------------------------------------------------------------

    def get_endpoints(self, query):
        return HTTPStatus.OK, endpoints_json(self.server.engine.endpoints(self._client()))

    def get_topologies(self, query):
        return HTTPStatus.OK, topologies_json(self.server.engine.installed(self._client()))

    def put_topology(self, topology_id: str, query):
        client = self._client()
        body = self._body()
        # accept a bare topology object or one wrapped in a one-element list
        if isinstance(body, dict) and set(body) == {"installed-topologies"}:
            items = body["installed-topologies"]
            if not isinstance(items, list) or len(items) != 1:
                raise SchemaViolation(".installed-topologies", "expected exactly one topology")
            request = request_from_json(items[0], ".installed-topologies[0]")
        else:
            request = request_from_json(body)
        if request.topology_id != topology_id:
            raise SchemaViolation(".topology-id", f"does not match URL id {topology_id!r}")
        engine = self.server.engine
        _, created = engine.put_topology(client, request)
        self.server.persist()
        view = engine.render(client, topology_id)
        return (HTTPStatus.CREATED if created else HTTPStatus.OK), view

    def delete_topology(self, topology_id: str, query):
        self.server.engine.delete_topology(self._client(), topology_id, force=_flag(query, "force"))
        self.server.persist()
        return HTTPStatus.NO_CONTENT, None

    def get_view(self, topology_id: str, query):
        return HTTPStatus.OK, self.server.engine.render(self._client(), topology_id, full=_flag(query, "full"))

    def post_connection(self, topology_id: str, query):
        client = self._client()
        body = self._body()
        if not isinstance(body, dict) or set(body) != {"virtual-link-id"} or not isinstance(body["virtual-link-id"], str):
            raise SchemaViolation(".", 'expected {"virtual-link-id": string}')
        conn = self.server.engine.activate(client, topology_id, body["virtual-link-id"])
        self.server.persist()
        return HTTPStatus.CREATED, conn.to_json()

    def delete_connection(self, connection_id: str, query):
        self.server.engine.deactivate(connection_id, client=self._client())
        self.server.persist()
        return HTTPStatus.NO_CONTENT, None

    def get_events(self, query):
        try:
            since = int(query.get("since", ["0"])[-1])
            limit = int(query.get("limit", ["100"])[-1])
        except ValueError:
            raise HttpError(HTTPStatus.BAD_REQUEST, {"error": "BadQuery", "message": "since/limit must be integers"})
        if since < 0 or limit < 1:
            raise HttpError(HTTPStatus.BAD_REQUEST, {"error": "BadQuery", "message": "since >= 0, limit >= 1"})
        client = self.headers.get(CLIENT_HEADER) or None
        events = self.server.engine.poll_events(since, limit, client)
        return HTTPStatus.OK, {"events": [e.to_json() for e in events]}


def make_server(engine: Hypervisor, host: str = "127.0.0.1", port: int = 0, snapshot: Path | None = None) -> LumenServer:
    try:
        return LumenServer((host, port), engine, snapshot)
    except OSError as exc:
        raise BindFailure(f"cannot listen on {host}:{port}: {exc}") from None


def serve(
    config: ServiceConfig,
    ready: Callable[[LumenServer], None] | None = None,
    stop: threading.Event | None = None,
) -> None:
    """Run the API until SIGINT/SIGTERM (or ``stop`` is set), then write a final snapshot."""
    engine = build_engine(config)
    server = make_server(engine, config.listen, config.port, config.snapshot)
    stop = stop or threading.Event()

    def _stop(signum, frame):
        stop.set()

    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGTERM, _stop)
        signal.signal(signal.SIGINT, _stop)
    worker = threading.Thread(target=server.serve_forever, name="lumen-http", daemon=True)
    worker.start()
    log.info("listening on %s", server.url)
    if ready is not None:
        ready(server)
    try:
        stop.wait()
    finally:
        server.shutdown()
        server.server_close()
        server.persist()
        log.info("stopped; snapshot written")

