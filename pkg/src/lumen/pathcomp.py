"""Path computation over the fiber graph.

All searches run on a directed *expanded* graph built per query:

* unrestricted nodes are a single vertex (or an ``in -> out`` pair of vertices
  with unit capacity when node-disjointness is requested);
* nodes with transit restrictions are expanded into one ``in`` and one ``out``
  vertex per fiber-bound TP, joined only for the allowed (in, out) pairs;
* the source and destination collapse to dedicated ``s``/``t`` vertices, so
  a path can neither re-enter its source nor leave its destination.

This keeps Dijkstra, Yen and the successive-shortest-path disjoint search
textbook-plain. The expansion can admit walks that revisit a restricted node
through two different TP pairs; results are therefore checked against the
physical graph and, for disjoint sets, an exhaustive search takes over when
the relaxed optimum is not physically valid.

Ties between equal-cost paths are broken by the lexicographically smallest
sequence of link ids.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InvalidArgs, UnknownNode


class DisjointMode(str, Enum):
    NONE = "none"
    LINK = "link"
    NODE = "node"


@dataclass(frozen=True)
class Edge:
    """An undirected fiber: ``tp_u``/``tp_v`` are the TPs it occupies at each end."""

    link: str
    u: str
    v: str
    weight: float
    tp_u: str = ""
    tp_v: str = ""

    def __post_init__(self) -> None:
        # plain graphs don't name TPs; the link id is unique per node anyway
        if not self.tp_u:
            object.__setattr__(self, "tp_u", self.link)
        if not self.tp_v:
            object.__setattr__(self, "tp_v", self.link)

    def other(self, node: str) -> str:
        return self.v if node == self.u else self.u

    def tp_at(self, node: str) -> str:
        return self.tp_u if node == self.u else self.tp_v


@dataclass(frozen=True)
class Path:
    nodes: tuple[str, ...]
    links: tuple[str, ...]
    cost: float

    @property
    def interior(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    def sort_key(self) -> tuple[float, tuple[str, ...]]:
        return (self.cost, self.links)

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "links": list(self.links), "cost": self.cost}

    @classmethod
    def from_json(cls, data: Mapping) -> "Path":
        return cls(tuple(data["nodes"]), tuple(data["links"]), float(data["cost"]))


class WeightedGraph:
    """Undirected multigraph with nonnegative weights and optional transit rules.

    ``transit`` maps a node to the set of ``(tp_in, tp_out)`` pairs a path may
    use when passing through it. Nodes absent from ``transit`` allow every
    transit.
    """

    def __init__(
        self,
        nodes: Iterable[str],
        edges: Iterable[Edge],
        transit: Mapping[str, Iterable[tuple[str, str]]] | None = None,
    ):
        self.nodes: tuple[str, ...] = tuple(sorted(set(nodes)))
        node_set = set(self.nodes)
        self.edges: dict[str, Edge] = {}
        for edge in sorted(edges, key=lambda e: e.link):
            if edge.link in self.edges:
                raise InvalidArgs(f"duplicate link id {edge.link!r}")
            if edge.u not in node_set or edge.v not in node_set:
                raise UnknownNode(f"link {edge.link!r} references an unknown node")
            if edge.u == edge.v:
                raise InvalidArgs(f"link {edge.link!r} is a self-loop")
            if not (isinstance(edge.weight, (int, float)) and math.isfinite(edge.weight)):
                raise InvalidArgs(f"link {edge.link!r} has non-finite weight")
            if edge.weight < 0:
                raise InvalidArgs(f"link {edge.link!r} has negative weight {edge.weight}")
            self.edges[edge.link] = edge
        self.incident: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        for edge in self.edges.values():
            self.incident[edge.u].append(edge)
            self.incident[edge.v].append(edge)
        self.transit: dict[str, frozenset[tuple[str, str]]] = {
            n: frozenset(pairs) for n, pairs in (transit or {}).items()
        }

    @classmethod
    def from_edges(
        cls, triples: Iterable[Sequence], nodes: Iterable[str] = ()
    ) -> "WeightedGraph":
        """Build from ``(u, v, w)`` or ``(link, u, v, w)`` tuples.

        Three-element tuples get link ids ``e00``, ``e01``, ... in input order.
        """
        edges = []
        all_nodes = set(nodes)
        triples = list(triples)
        width = max(2, len(str(len(triples))))
        for i, item in enumerate(triples):
            if len(item) == 3:
                u, v, w = item
                link = f"e{i:0{width}d}"
            else:
                link, u, v, w = item
            edges.append(Edge(link, u, v, w))
            all_nodes.update((u, v))
        return cls(all_nodes, edges)

    def __contains__(self, node: str) -> bool:
        return node in self.incident

    def edge_count(self) -> int:
        return len(self.edges)

    def allows(self, node: str, tp_in: str, tp_out: str) -> bool:
        if tp_in == tp_out:
            return False
        rule = self.transit.get(node)
        return rule is None or (tp_in, tp_out) in rule

    def without_links(self, links: Iterable[str]) -> "WeightedGraph":
        drop = set(links)
        return WeightedGraph(
            self.nodes, [e for e in self.edges.values() if e.link not in drop], self.transit
        )

    def path_from_links(self, src: str, links: Sequence[str]) -> Path:
        nodes = [src]
        cost = 0.0
        for link in links:
            edge = self.edges[link]
            if nodes[-1] not in (edge.u, edge.v):
                raise InvalidArgs(f"link {link!r} does not continue the path at {nodes[-1]!r}")
            nodes.append(edge.other(nodes[-1]))
            cost += edge.weight
        return Path(tuple(nodes), tuple(links), cost)


def path_violations(g: WeightedGraph, path: Path) -> list[str]:
    """Return every broken Path invariant as a short message (empty when valid)."""
    problems = []
    if len(path.links) != len(path.nodes) - 1:
        problems.append("link/node count mismatch")
        return problems
    if len(set(path.nodes)) != len(path.nodes):
        problems.append("repeated node")
    cost = 0.0
    for i, link in enumerate(path.links):
        edge = g.edges.get(link)
        if edge is None:
            problems.append(f"unknown link {link}")
            continue
        if {edge.u, edge.v} != {path.nodes[i], path.nodes[i + 1]}:
            problems.append(f"link {link} does not join {path.nodes[i]}-{path.nodes[i + 1]}")
            continue
        cost += edge.weight
        if i > 0:
            prev = g.edges.get(path.links[i - 1])
            node = path.nodes[i]
            if prev is not None and not g.allows(node, prev.tp_at(node), edge.tp_at(node)):
                problems.append(f"transit {prev.tp_at(node)}->{edge.tp_at(node)} forbidden at {node}")
    if not math.isclose(cost, path.cost, rel_tol=1e-9, abs_tol=1e-9):
        problems.append(f"cost {path.cost} != {cost}")
    return problems


# --- expanded graph --------------------------------------------------------


@dataclass(frozen=True)
class _Arc:
    id: int
    tail: tuple
    head: tuple
    weight: float
    link: str | None  # None for intra-node arcs


_SRC = ("s",)
_DST = ("t",)


def _expand(g: WeightedGraph, src: str, dst: str, split: bool = False) -> tuple[list[_Arc], dict]:
    def in_v(node: str, tp: str):
        if node == src:
            return None
        if node == dst:
            return _DST
        if node in g.transit:
            return ("i", node, tp)
        return ("i", node) if split else ("n", node)

    def out_v(node: str, tp: str):
        if node == dst:
            return None
        if node == src:
            return _SRC
        if node in g.transit:
            return ("o", node, tp)
        return ("o", node) if split else ("n", node)

    raw: list[tuple] = []
    for edge in g.edges.values():
        for a, b in ((edge.u, edge.v), (edge.v, edge.u)):
            tail, head = out_v(a, edge.tp_at(a)), in_v(b, edge.tp_at(b))
            if tail is not None and head is not None:
                raw.append((tail, head, float(edge.weight), edge.link))
    for node in g.nodes:
        if node in (src, dst):
            continue
        if node in g.transit:
            for tp_in, tp_out in sorted(g.transit[node]):
                raw.append((("i", node, tp_in), ("o", node, tp_out), 0.0, None))
        elif split:
            raw.append((("i", node), ("o", node), 0.0, None))

    raw.sort(key=lambda r: (r[3] or "", r[0], r[1]))
    arcs = [_Arc(i, *r) for i, r in enumerate(raw)]
    adj: dict[tuple, list[_Arc]] = {}
    for arc in arcs:
        adj.setdefault(arc.tail, []).append(arc)
    return arcs, adj


def _label(arcs: Sequence[_Arc]) -> tuple[float, tuple[str, ...]]:
    return (sum(a.weight for a in arcs), tuple(a.link for a in arcs if a.link is not None))


def _dijkstra(
    adj: Mapping[tuple, list[_Arc]],
    start: tuple,
    goal: tuple,
    banned_vertices: frozenset | set = frozenset(),
    banned_arcs: frozenset | set = frozenset(),
) -> list[_Arc] | None:
    best: dict[tuple, tuple[float, tuple[str, ...]]] = {start: (0.0, ())}
    prev: dict[tuple, _Arc] = {}
    done: set[tuple] = set()
    heap = [(0.0, (), start)]
    while heap:
        cost, seq, v = heapq.heappop(heap)
        if v in done or best[v] != (cost, seq):
            continue
        done.add(v)
        if v == goal:
            break
        for arc in adj.get(v, ()):
            if arc.id in banned_arcs or arc.head in banned_vertices or arc.head in done:
                continue
            label = (cost + arc.weight, seq + (arc.link,) if arc.link is not None else seq)
            if arc.head not in best or label < best[arc.head]:
                best[arc.head] = label
                prev[arc.head] = arc
                heapq.heappush(heap, (label[0], label[1], arc.head))
    if goal not in done:
        return None
    out = []
    v = goal
    while v != start:
        arc = prev[v]
        out.append(arc)
        v = arc.tail
    out.reverse()
    return out


def _yen(adj: Mapping[tuple, list[_Arc]], start: tuple, goal: tuple) -> Iterator[list[_Arc]]:
    """Yield every loopless start-goal path of the expanded graph in (cost, links) order."""
    first = _dijkstra(adj, start, goal)
    if first is None:
        return
    accepted = [first]
    yield first
    seen = {tuple(a.id for a in first)}
    candidates: list[tuple] = []
    counter = itertools.count()
    while True:
        last = accepted[-1]
        vertices = [start] + [a.head for a in last]
        for i in range(len(last)):
            root = last[:i]
            root_ids = tuple(a.id for a in root)
            banned_arcs = {
                p[i].id for p in accepted if len(p) > i and tuple(a.id for a in p[:i]) == root_ids
            }
            spur = _dijkstra(adj, vertices[i], goal, set(vertices[:i]), banned_arcs)
            if spur is None:
                continue
            total = root + spur
            key = tuple(a.id for a in total)
            if key in seen:
                continue
            seen.add(key)
            cost, seq = _label(total)
            heapq.heappush(candidates, (cost, seq, next(counter), total))
        if not candidates:
            return
        _, _, _, best = heapq.heappop(candidates)
        accepted.append(best)
        yield best


def _to_path(g: WeightedGraph, src: str, arcs: Sequence[_Arc]) -> Path:
    return g.path_from_links(src, [a.link for a in arcs if a.link is not None])


def _is_simple(path: Path) -> bool:
    return len(set(path.nodes)) == len(path.nodes)


def _check_nodes(g: WeightedGraph, *nodes: str) -> None:
    for node in nodes:
        if node not in g:
            raise UnknownNode(f"unknown node {node!r}")


def _simple_paths(g: WeightedGraph, src: str, dst: str) -> Iterator[Path]:
    _, adj = _expand(g, src, dst)
    for arcs in _yen(adj, _SRC, _DST):
        path = _to_path(g, src, arcs)
        if _is_simple(path):
            yield path


# --- public operations -----------------------------------------------------


def shortest_path(g: WeightedGraph, src: str, dst: str) -> Path | None:
    """Minimum-cost loopless path honoring transit rules, or None if unreachable."""
    _check_nodes(g, src, dst)
    if src == dst:
        return Path((src,), (), 0.0)
    _, adj = _expand(g, src, dst)
    arcs = _dijkstra(adj, _SRC, _DST)
    if arcs is None:
        return None
    path = _to_path(g, src, arcs)
    if _is_simple(path):
        return path
    # the relaxed optimum revisits a restricted node; take the first simple one
    return next(_simple_paths(g, src, dst), None)


def k_shortest(g: WeightedGraph, src: str, dst: str, k: int) -> list[Path]:
    """Up to ``k`` distinct loopless paths in nondecreasing cost (Yen)."""
    _check_nodes(g, src, dst)
    if k < 1:
        raise InvalidArgs("k must be positive")
    if src == dst:
        return [Path((src,), (), 0.0)]
    return list(itertools.islice(_simple_paths(g, src, dst), k))


def disjoint_paths(
    g: WeightedGraph, src: str, dst: str, k: int, mode: DisjointMode | str
) -> list[Path] | None:
    """``k`` pairwise-disjoint paths of minimum total cost, or None if none exist.

    Link mode forbids shared links; node mode additionally forbids shared
    interior nodes. The result is sorted by (cost, link ids).
    """
    mode = DisjointMode(mode)
    if mode is DisjointMode.NONE:
        raise InvalidArgs("disjoint_paths needs mode 'link' or 'node'")
    _check_nodes(g, src, dst)
    if src == dst:
        raise InvalidArgs("disjoint paths need distinct endpoints")
    if k < 1:
        raise InvalidArgs("k must be positive")

    arcs, _ = _expand(g, src, dst, split=mode is DisjointMode.NODE)
    flow = _min_cost_flow(arcs, _SRC, _DST, k)
    if flow is None:
        return None
    paths = [_to_path(g, src, p) for p in _decompose(arcs, flow, _SRC, _DST)]
    if len(paths) == k and _valid_disjoint_set(paths, mode):
        return sorted(paths, key=Path.sort_key)
    return _exhaustive_disjoint(g, src, dst, k, mode)


def are_disjoint(a: Path, b: Path, mode: DisjointMode | str) -> bool:
    mode = DisjointMode(mode)
    if mode is DisjointMode.NONE:
        return True
    if set(a.links) & set(b.links):
        return False
    if mode is DisjointMode.NODE and set(a.interior) & set(b.interior):
        return False
    return True


def _valid_disjoint_set(paths: Sequence[Path], mode: DisjointMode) -> bool:
    if not all(_is_simple(p) for p in paths):
        return False
    return all(are_disjoint(a, b, mode) for a, b in itertools.combinations(paths, 2))


def _min_cost_flow(arcs: Sequence[_Arc], s: tuple, t: tuple, k: int) -> list[int] | None:
    """Send ``k`` units of unit-capacity flow from s to t at minimum cost.

    Successive shortest paths with Bellman-Ford on the residual graph; the
    graphs here are small enough that potentials are not worth the code.
    Returns per-arc flow, or None when fewer than k units fit.
    """
    flow = [0] * len(arcs)
    for _ in range(k):
        dist: dict[tuple, float] = {s: 0.0}
        via: dict[tuple, tuple[int, int]] = {}
        for _ in range(len(arcs) + 1):
            changed = False
            for arc in arcs:
                # forward residual
                if flow[arc.id] == 0 and arc.tail in dist:
                    nd = dist[arc.tail] + arc.weight
                    if arc.head not in dist or nd < dist[arc.head] - 1e-12:
                        dist[arc.head] = nd
                        via[arc.head] = (arc.id, 1)
                        changed = True
                # backward residual
                if flow[arc.id] == 1 and arc.head in dist:
                    nd = dist[arc.head] - arc.weight
                    if arc.tail not in dist or nd < dist[arc.tail] - 1e-12:
                        dist[arc.tail] = nd
                        via[arc.tail] = (arc.id, -1)
                        changed = True
            if not changed:
                break
        if t not in dist:
            return None
        v = t
        steps = 0
        while v != s:
            arc_id, direction = via[v]
            arc = arcs[arc_id]
            flow[arc_id] += direction
            v = arc.tail if direction == 1 else arc.head
            steps += 1
            if steps > len(arcs):
                raise RuntimeError("residual graph contains a negative cycle")
    _cancel_antiparallel(arcs, flow)
    return flow


def _cancel_antiparallel(arcs: Sequence[_Arc], flow: list[int]) -> None:
    # one fiber carrying flow both ways between the same vertices is a no-op
    by_link: dict[str, list[_Arc]] = {}
    for arc in arcs:
        if arc.link is not None and flow[arc.id]:
            by_link.setdefault(arc.link, []).append(arc)
    for used in by_link.values():
        if len(used) == 2 and used[0].tail == used[1].head and used[0].head == used[1].tail:
            flow[used[0].id] = flow[used[1].id] = 0


def _decompose(arcs: Sequence[_Arc], flow: Sequence[int], s: tuple, t: tuple) -> list[list[_Arc]]:
    remaining = {a.id for a in arcs if flow[a.id]}
    out_arcs: dict[tuple, list[_Arc]] = {}
    for arc in arcs:
        if arc.id in remaining:
            out_arcs.setdefault(arc.tail, []).append(arc)
    paths = []
    while True:
        start = next((a for a in out_arcs.get(s, ()) if a.id in remaining), None)
        if start is None:
            return paths
        walk: list[_Arc] = []
        position: dict[tuple, int] = {s: 0}
        v = s
        while v != t:
            arc = next((a for a in out_arcs.get(v, ()) if a.id in remaining), None)
            if arc is None:  # flow conservation broken; cannot happen
                raise RuntimeError("flow decomposition stalled")
            remaining.discard(arc.id)
            if arc.head in position:
                # zero-cost cycle in the flow: drop it
                cut = position[arc.head]
                for dropped in walk[cut:]:
                    position.pop(dropped.head, None)
                walk = walk[:cut]
                v = arc.head
                continue
            walk.append(arc)
            position[arc.head] = len(walk)
            v = arc.head
        paths.append(walk)


def _exhaustive_disjoint(
    g: WeightedGraph, src: str, dst: str, k: int, mode: DisjointMode
) -> list[Path] | None:
    candidates = list(_simple_paths(g, src, dst))
    best: tuple[float, list[Path]] | None = None

    def search(start: int, chosen: list[Path], cost: float) -> None:
        nonlocal best
        if len(chosen) == k:
            if best is None or cost < best[0] - 1e-12:
                best = (cost, list(chosen))
            return
        need = k - len(chosen)
        for i in range(start, len(candidates) - need + 1):
            p = candidates[i]
            # candidates are sorted by cost, so this bound is admissible
            if best is not None and cost + need * p.cost >= best[0] - 1e-12:
                return
            if all(are_disjoint(p, q, mode) for q in chosen):
                chosen.append(p)
                search(i + 1, chosen, cost + p.cost)
                chosen.pop()

    search(0, [], 0.0)
    if best is None:
        return None
    return sorted(best[1], key=Path.sort_key)


def max_disjoint_count(g: WeightedGraph, src: str, dst: str, mode: DisjointMode | str, limit: int) -> int:
    """Largest n <= limit for which ``n`` disjoint paths exist."""
    for n in range(limit, 0, -1):
        if disjoint_paths(g, src, dst, n, mode) is not None:
            return n
    return 0
