"""Redundant path selection over the master's graph."""

from __future__ import annotations

import heapq
from collections import Counter
from typing import Callable, Optional

import networkx as nx

from tdmh.errors import Unreachable
from tdmh.graph import NetworkGraph, edge

NodePath = tuple[int, ...]


def cheapest_path(graph: NetworkGraph, src: int, dst: int,
                  cost: Callable[[int, int], Optional[float]]) -> Optional[NodePath]:
    """Least-cost simple path; equal costs resolve to the lexicographically smallest
    node sequence. ``cost`` returning ``None`` forbids an edge."""
    heap = [(0.0, (src,))]
    settled = set()
    while heap:
        c, path = heapq.heappop(heap)
        u = path[-1]
        if u in settled:
            continue
        settled.add(u)
        if u == dst:
            return path
        for v in graph.neighbors(u):
            if v in settled:
                continue
            w = cost(u, v)
            if w is not None:
                heapq.heappush(heap, (c + w, path + (v,)))
    return None


def links(path: NodePath) -> list[tuple[int, int]]:
    return [edge(a, b) for a, b in zip(path, path[1:])]


def _disjoint_by_flow(graph: NetworkGraph, src: int, dst: int, k: int) -> list[NodePath]:
    """Up to ``k`` edge-disjoint paths of minimum total length (unit-capacity min-cost flow)."""
    dg = nx.DiGraph()
    for u, v in graph.edges():
        dg.add_edge(u, v, capacity=1, weight=1)
        dg.add_edge(v, u, capacity=1, weight=1)
    source = ("source",)
    dg.add_edge(source, src, capacity=k, weight=0)
    flow = nx.max_flow_min_cost(dg, source, dst)
    used = {(u, v) for u, nbrs in flow.items() if u != source for v, f in nbrs.items() if f > 0}
    paths = []
    while True:
        path = [src]
        while path[-1] != dst:
            step = min((v for (u, v) in used if u == path[-1]), default=None)
            if step is None:
                break
            used.discard((path[-1], step))
            path.append(step)
        if path[-1] != dst:
            break
        paths.append(tuple(path))
    return sorted(paths, key=lambda p: (len(p), p))


def disjoint_paths(graph: NetworkGraph, src: int, dst: int, redundancy: int = 1) -> list[NodePath]:
    """``redundancy`` node sequences from ``src`` to ``dst``.

    The first is a shortest path. Later ones are shortest paths sharing no edge
    with any earlier one; once no such path exists, paths minimising the number
    of reused edges are returned instead.
    """
    if src not in graph or dst not in graph:
        raise Unreachable(src, dst)
    first = cheapest_path(graph, src, dst, lambda u, v: 1)
    if first is None:
        raise Unreachable(src, dst)
    paths = [first]
    used = set(links(first))
    while len(paths) < redundancy:
        p = cheapest_path(graph, src, dst, lambda u, v: None if edge(u, v) in used else 1)
        if p is None:
            break
        paths.append(p)
        used.update(links(p))

    # Greedy successive shortest paths can miss a disjoint set that exists.
    if len(paths) < redundancy:
        best = _disjoint_by_flow(graph, src, dst, redundancy)
        if len(best) > len(paths):
            paths = best

    shared = Counter(e for p in paths for e in links(p))
    big = len(graph) + 1
    while len(paths) < redundancy:
        p = cheapest_path(graph, src, dst, lambda u, v: 1 + big * shared[edge(u, v)])
        paths.append(p)
        shared.update(links(p))
    return paths


def route_paths(graph: NetworkGraph, stream) -> list[NodePath]:
    """Paths for a stream (or SME), one per unit of spatial redundancy."""
    return disjoint_paths(graph, stream.src, stream.dst, stream.spatial_redundancy)
