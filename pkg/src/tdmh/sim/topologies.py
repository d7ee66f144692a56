"""Physical topologies used by the simulation campaigns."""

from __future__ import annotations

import math

from tdmh.graph import NetworkGraph

# Link uptimes measured over two days on the nine-node office deployment.
OFFICE_LINK_RELIABILITY = {
    (0, 1): 1.0000, (0, 3): 1.0000, (0, 5): 1.0000, (0, 7): 0.9974,
    (1, 3): 1.0000, (1, 5): 0.9334, (1, 7): 0.5614,
    (2, 4): 0.9901, (2, 6): 0.9258, (2, 7): 0.0603, (2, 8): 0.9898,
    (3, 5): 0.5509,
    (4, 5): 0.9927, (4, 6): 0.1570, (4, 7): 0.9883, (4, 8): 0.9789,
    (5, 7): 0.9967, (5, 8): 0.9352,
    (6, 8): 0.8421, (7, 8): 0.9621,
}

# Streams of the redundancy experiment: (src, dst, period_ms).
OFFICE_STREAMS = ((3, 0, 100), (6, 0, 200), (4, 0, 200))


def office_graph(min_reliability: float = 0.0) -> NetworkGraph:
    """The nine-node deployment; links at or below ``min_reliability`` are left out."""
    g = NetworkGraph(range(9))
    for (u, v), r in OFFICE_LINK_RELIABILITY.items():
        if r > min_reliability:
            g.add_edge(u, v, r)
    return g


def line(n: int, reliability: float = 1.0) -> NetworkGraph:
    return NetworkGraph(range(n), [(i, i + 1, reliability) for i in range(n - 1)])


def star(n: int, reliability: float = 1.0) -> NetworkGraph:
    return NetworkGraph(range(n), [(0, i, reliability) for i in range(1, n)])


def _lattice_disk(n: int) -> list[tuple[int, int]]:
    """The ``n`` triangular-lattice points closest to the origin, in axial coordinates."""
    r = int(math.isqrt(n)) + 2
    pts = []
    for q in range(-r, r + 1):
        for s in range(-r, r + 1):
            x = q + s / 2
            y = s * math.sqrt(3) / 2
            pts.append((round(x * x + y * y, 9), math.atan2(y, x), q, s))
    pts.sort()
    return [(q, s) for _, _, q, s in pts[:n]]


AXIAL_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


def hexagonal(n: int, id_assignment: str = "reverse", reliability: float = 1.0) -> NetworkGraph:
    """Hexagonal-like mesh of ``n`` nodes: every node has up to six neighbours.

    Nodes fill a disk of the triangular lattice and the master (id 0) sits on
    its rim. With ``"reverse"`` ids the nodes nearest the master get the highest
    ids and the farthest node gets id 1; ``"forward"`` is the opposite.
    """
    if n < 1:
        raise ValueError("need at least the master")
    pts = _lattice_disk(n)
    index = {p: i for i, p in enumerate(pts)}
    master = max(range(n), key=lambda i: (pts[i][0] + pts[i][1] / 2, -pts[i][1]))
    pos = NetworkGraph(range(n))
    for i, (q, s) in enumerate(pts):
        for dq, ds in AXIAL_NEIGHBOURS:
            j = index.get((q + dq, s + ds))
            if j is not None and j > i:
                pos.add_edge(i, j, reliability)
    dist = pos.hops_from(master)
    others = sorted((i for i in range(n) if i != master), key=lambda i: (dist[i], i))
    if id_assignment == "reverse":
        ids = {p: n - 1 - k for k, p in enumerate(others)}
    elif id_assignment == "forward":
        ids = {p: k + 1 for k, p in enumerate(others)}
    else:
        raise ValueError(f"unknown id assignment {id_assignment!r}")
    ids[master] = 0
    g = NetworkGraph(range(n))
    for u, v, r in pos.weighted_edges():
        g.add_edge(ids[u], ids[v], r)
    return g


def relabel(graph: NetworkGraph, mapping: dict[int, int]) -> NetworkGraph:
    g = NetworkGraph(mapping[v] for v in graph.nodes)
    for u, v, r in graph.weighted_edges():
        g.add_edge(mapping[u], mapping[v], r)
    return g
