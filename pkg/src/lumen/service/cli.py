"""``lumen`` command line: run the service, validate files, talk to a server."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from urllib.error import HTTPError, URLError
from urllib.parse import quote
from urllib.request import Request, urlopen

from ..errors import LumenError
from ..phys import load_physical_topology
from ..view import view_to_dot
from ..vtc import parse_constraints
from .config import CONFIG_ENV, ServiceConfig
from .http import CLIENT_HEADER, serve


def _call(method: str, url: str, client: str | None = None, body: object = None) -> tuple[int, object]:
    data = None if body is None else json.dumps(body).encode("utf-8")
    req = Request(url, data=data, method=method)
    if data is not None:
        req.add_header("Content-Type", "application/json")
    if client:
        req.add_header(CLIENT_HEADER, client)
    try:
        with urlopen(req, timeout=30) as resp:
            raw = resp.read()
            return resp.status, json.loads(raw) if raw else None
    except HTTPError as exc:
        raw = exc.read()
        return exc.code, json.loads(raw) if raw else None


def _print(obj: object) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False))


def cmd_serve(args: argparse.Namespace) -> int:
    path = os.environ.get(CONFIG_ENV) or args.config
    if not path:
        print(f"error: --config or {CONFIG_ENV} is required", file=sys.stderr)
        return 2
    serve(ServiceConfig.load(path))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    topo = load_physical_topology(args.phys)
    print(f"{args.phys}: {len(topo.nodes)} nodes, {len(topo.links)} links, {len(topo.endpoints)} endpoints")
    if args.constraints:
        constraints = parse_constraints(Path(args.constraints).read_bytes())
        problems = constraints.violations(topo)
        for v in problems:
            print(f"{args.constraints}: {v}")
        if problems:
            return 1
    print("ok")
    return 0


def cmd_submit(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.request).read_text(encoding="utf-8"))
    if "topologies" in doc:
        items = doc["topologies"]["installed-topologies"]
    else:
        items = [doc]
    worst = 0
    for item in items:
        tid = item.get("topology-id", "")
        url = f"{args.server.rstrip('/')}/restconf/data/topologies/topology={quote(tid, safe='')}"
        status, body = _call("PUT", url, args.client, item)
        print(f"PUT {tid}: {status}")
        _print(body)
        worst = max(worst, 0 if status < 300 else 1)
    return worst


def cmd_show(args: argparse.Namespace) -> int:
    url = f"{args.server.rstrip('/')}/views/topology={quote(args.topology, safe='')}"
    if args.full:
        url += "?full=true"
    status, body = _call("GET", url, args.client)
    if status != 200:
        _print(body)
        return 1
    if args.dot:
        sys.stdout.write(view_to_dot(body))
    else:
        _print(body)
    return 0


def cmd_events(args: argparse.Namespace) -> int:
    url = f"{args.server.rstrip('/')}/events?since={args.since}&limit={args.limit}"
    status, body = _call("GET", url, args.client)
    _print(body)
    return 0 if status == 200 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lumen", description="Optical network hypervisor with an intent interface.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--config", help=f"service config file (env {CONFIG_ENV} overrides)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="check a physical topology file")
    p.add_argument("--phys", required=True)
    p.add_argument("--constraints", help="also check a provider constraints file against it")
    p.set_defaults(func=cmd_validate)

    def remote(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", required=True, help="base URL, e.g. http://127.0.0.1:8040")
        p.add_argument("--client", default=os.environ.get("LUMEN_CLIENT"), help="client id")

    p = sub.add_parser("submit", help="install or replace topologies from a request file")
    remote(p)
    p.add_argument("--request", required=True)
    p.set_defaults(func=cmd_submit)

    p = sub.add_parser("show", help="print a virtual topology view")
    remote(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--dot", action="store_true", help="emit Graphviz instead of JSON")
    p.add_argument("--full", action="store_true", help="include supporting resources")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("events", help="poll the event log")
    remote(p)
    p.add_argument("--since", type=int, default=0)
    p.add_argument("--limit", type=int, default=100)
    p.set_defaults(func=cmd_events)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LumenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except URLError as exc:
        print(f"error: cannot reach server: {exc.reason}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
