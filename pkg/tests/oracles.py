"""Brute-force reference implementations used as test oracles.

Nothing here imports the algorithms under test; only plain data types.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Sequence

from lumen.pathcomp import Edge, WeightedGraph


def simple_paths(g: WeightedGraph, src: str, dst: str) -> list[tuple[float, tuple[str, ...], tuple[str, ...]]]:
    """Every loopless src-dst path honoring transit rules, as (cost, nodes, links)."""
    out = []

    def walk(node: str, nodes: list[str], links: list[str], cost: float, tp_in: str | None) -> None:
        if node == dst:
            out.append((cost, tuple(nodes), tuple(links)))
            return
        for edge in g.edges.values():
            if node not in (edge.u, edge.v):
                continue
            nxt = edge.v if node == edge.u else edge.u
            if nxt in nodes:
                continue
            tp_out = edge.tp_u if node == edge.u else edge.tp_v
            if tp_in is not None:
                if tp_in == tp_out:
                    continue
                rule = g.transit.get(node)
                if rule is not None and (tp_in, tp_out) not in rule:
                    continue
            tp_next = edge.tp_v if node == edge.u else edge.tp_u
            nodes.append(nxt)
            links.append(edge.link)
            walk(nxt, nodes, links, cost + edge.weight, tp_next)
            nodes.pop()
            links.pop()

    if src == dst:
        return [(0.0, (src,), ())]
    walk(src, [src], [], 0.0, None)
    return out


def disjoint(a: tuple, b: tuple, mode: str) -> bool:
    if set(a[2]) & set(b[2]):
        return False
    if mode == "node" and set(a[1][1:-1]) & set(b[1][1:-1]):
        return False
    return True


def best_disjoint_cost(g: WeightedGraph, src: str, dst: str, k: int, mode: str) -> float | None:
    """Minimum total cost over all k-sets of pairwise disjoint simple paths."""
    paths = simple_paths(g, src, dst)
    best = None
    for combo in itertools.combinations(paths, k):
        if all(disjoint(a, b, mode) for a, b in itertools.combinations(combo, 2)):
            cost = sum(p[0] for p in combo)
            if best is None or cost < best:
                best = cost
    return best


def first_fit_scan(occupied: Sequence[set[int]], count: int, slots: int) -> int | None:
    """Lowest start whose window is free on every link, by exhaustive scan."""
    for start in range(slots - count + 1):
        window = set(range(start, start + count))
        if all(not (window & occ) for occ in occupied):
            return start
    return None


def random_connected_graph(rng: random.Random, n: int, extra: int, max_w: int = 9) -> WeightedGraph:
    """Random spanning tree plus ``extra`` chords, integer weights in [1, max_w]."""
    names = [f"N{i}" for i in range(n)]
    pairs: set[tuple[int, int]] = set()
    for i in range(1, n):
        j = rng.randrange(i)
        pairs.add((j, i))
    candidates = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in pairs]
    rng.shuffle(candidates)
    pairs.update(candidates[:extra])
    edges = [
        Edge(f"L{idx:02d}", names[i], names[j], rng.randint(1, max_w))
        for idx, (i, j) in enumerate(sorted(pairs))
    ]
    return WeightedGraph(names, edges)


def canonical(paths: Iterable) -> set[tuple[str, ...]]:
    return {tuple(p.links) for p in paths}


def with_random_transit(rng: random.Random, g: WeightedGraph, p_restrict: float = 0.4) -> WeightedGraph:
    """Give some nodes a symmetric transit rule dropping about half of their crossings."""
    transit = {}
    for node in g.nodes:
        tps = sorted({e.tp_at(node) for e in g.incident[node]})
        if len(tps) < 3 or rng.random() > p_restrict:
            continue
        allowed = set()
        for a, b in itertools.combinations(tps, 2):
            if rng.random() < 0.5:
                allowed |= {(a, b), (b, a)}
        transit[node] = allowed
    return WeightedGraph(g.nodes, g.edges.values(), transit)
