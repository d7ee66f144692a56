"""Undirected network graph with optional per-link reliability."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Optional


def edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class NetworkGraph:
    def __init__(self, nodes: Iterable[int] = (), edges: Iterable[tuple] = ()):
        self._adj: dict[int, dict[int, float]] = {}
        for n in nodes:
            self.add_node(n)
        for e in edges:
            self.add_edge(*e)

    def add_node(self, n: int) -> None:
        self._adj.setdefault(int(n), {})

    def remove_node(self, n: int) -> None:
        for m in self._adj.pop(n, {}):
            del self._adj[m][n]

    def add_edge(self, u: int, v: int, reliability: float = 1.0) -> None:
        if u == v:
            raise ValueError(f"self loop on node {u}")
        if not 0.0 <= reliability <= 1.0:
            raise ValueError(f"reliability {reliability} outside [0, 1]")
        self.add_node(u)
        self.add_node(v)
        self._adj[u][v] = reliability
        self._adj[v][u] = reliability

    def remove_edge(self, u: int, v: int) -> None:
        self._adj.get(u, {}).pop(v, None)
        self._adj.get(v, {}).pop(u, None)

    @property
    def nodes(self) -> set[int]:
        return set(self._adj)

    def __contains__(self, n) -> bool:
        return n in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def reliability(self, u: int, v: int) -> float:
        return self._adj.get(u, {}).get(v, 0.0)

    def neighbors(self, n: int) -> list[int]:
        return sorted(self._adj.get(n, ()))

    def degree(self, n: int) -> int:
        return len(self._adj.get(n, ()))

    def edges(self) -> list[tuple[int, int]]:
        return sorted(edge(u, v) for u, nb in self._adj.items() for v in nb if u < v)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edges())

    def weighted_edges(self) -> Iterator[tuple[int, int, float]]:
        for u, v in self.edges():
            yield u, v, self._adj[u][v]

    def copy(self) -> "NetworkGraph":
        g = NetworkGraph(self._adj)
        for u, v, r in self.weighted_edges():
            g.add_edge(u, v, r)
        return g

    def subgraph(self, nodes: Iterable[int], min_reliability: Optional[float] = None) -> "NetworkGraph":
        keep = set(nodes) & self.nodes
        g = NetworkGraph(keep)
        for u, v, r in self.weighted_edges():
            if u in keep and v in keep and (min_reliability is None or r > min_reliability):
                g.add_edge(u, v, r)
        return g

    def hops_from(self, src: int) -> dict[int, int]:
        """Breadth-first hop distance from ``src`` to every reachable node."""
        if src not in self._adj:
            return {}
        dist = {src: 0}
        q = deque([src])
        while q:
            u = q.popleft()
            for v in self._adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        return dist

    def is_connected(self) -> bool:
        if not self._adj:
            return True
        return len(self.hops_from(next(iter(self._adj)))) == len(self._adj)

    def __eq__(self, other):
        if not isinstance(other, NetworkGraph):
            return NotImplemented
        return self.nodes == other.nodes and sorted(self.weighted_edges()) == sorted(other.weighted_edges())

    def __repr__(self):
        return f"NetworkGraph(nodes={sorted(self.nodes)}, edges={self.edges()})"

    # Edge-list text: one ``u v reliability`` line per link; ``node n`` lines
    # declare isolated nodes. ``#`` starts a comment.

    def to_edge_list(self) -> str:
        lines = []
        linked = {n for e in self.edges() for n in e}
        for n in sorted(self.nodes - linked):
            lines.append(f"node {n}")
        for u, v, r in self.weighted_edges():
            lines.append(f"{u} {v} {r:g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "NetworkGraph":
        g = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "node" and len(parts) == 2:
                    g.add_node(int(parts[1]))
                elif len(parts) in (2, 3):
                    rel = float(parts[2]) if len(parts) == 3 else 1.0
                    g.add_edge(int(parts[0]), int(parts[1]), rel)
                else:
                    raise ValueError("expected 'u v [reliability]'")
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return g
