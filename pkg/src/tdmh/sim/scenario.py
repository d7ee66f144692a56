"""Scenario description for one simulation run."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from tdmh.errors import InvalidScenario
from tdmh.graph import NetworkGraph
from tdmh.netconfig import MASTER, NetworkConfiguration, validate
from tdmh.scheduler.streams import StreamManagementElement


class FaultKind(str, enum.Enum):
    NODE_FAIL = "NODE_FAIL"
    NODE_JOIN = "NODE_JOIN"
    LINK_SET = "LINK_SET"


@dataclass(frozen=True)
class Fault:
    time_ms: int
    kind: FaultKind
    node: Optional[int] = None
    u: Optional[int] = None
    v: Optional[int] = None
    reliability: Optional[float] = None

    @classmethod
    def fail(cls, time_ms: int, node: int) -> "Fault":
        return cls(time_ms, FaultKind.NODE_FAIL, node=node)

    @classmethod
    def join(cls, time_ms: int, node: int) -> "Fault":
        return cls(time_ms, FaultKind.NODE_JOIN, node=node)

    @classmethod
    def link(cls, time_ms: int, u: int, v: int, reliability: float) -> "Fault":
        return cls(time_ms, FaultKind.LINK_SET, u=u, v=v, reliability=reliability)


@dataclass(frozen=True)
class StreamRequest:
    sme: StreamManagementElement
    open_ms: int = 0
    close_ms: Optional[int] = None


@dataclass
class Scenario:
    config: NetworkConfiguration
    physical_graph: NetworkGraph
    duration_ms: int
    seed: int = 0
    faults: list[Fault] = field(default_factory=list)
    streams: list[StreamRequest] = field(default_factory=list)
    # Nodes absent at start (they may join through the fault script).
    absent: frozenset[int] = frozenset()
    # Position -> node id relabelling applied to ``physical_graph``.
    id_assignment: Optional[dict[int, int]] = None
    name: str = "scenario"

    def resolved_graph(self) -> NetworkGraph:
        if self.id_assignment is None:
            return self.physical_graph
        from tdmh.sim.topologies import relabel
        return relabel(self.physical_graph, self.id_assignment)

    def check(self) -> None:
        problems = [str(v) for v in validate(self.config)]
        g = self.physical_graph
        if self.id_assignment is not None:
            ids = self.id_assignment
            if set(ids) != g.nodes or sorted(ids.values()) != sorted(g.nodes):
                problems.append("id_assignment is not a permutation of the graph nodes")
            else:
                g = self.resolved_graph()
        if MASTER not in g:
            problems.append("graph has no master node 0")
        if any(not 0 <= n < self.config.max_nodes for n in g.nodes):
            problems.append(f"node id outside [0, {self.config.max_nodes})")
        if self.duration_ms <= 0:
            problems.append("duration must be positive")
        if MASTER in self.absent:
            problems.append("the master cannot start absent")
        for f in self.faults:
            if not 0 <= f.time_ms <= self.duration_ms:
                problems.append(f"fault at {f.time_ms} ms outside the run")
            if f.kind is FaultKind.LINK_SET:
                if f.u is None or f.v is None or f.reliability is None or not 0 <= f.reliability <= 1:
                    problems.append(f"bad LINK_SET at {f.time_ms} ms")
                elif f.u not in g or f.v not in g:
                    problems.append(f"LINK_SET names unknown node at {f.time_ms} ms")
            elif f.node not in g:
                problems.append(f"{f.kind.value} names unknown node {f.node}")
            elif f.node == MASTER and f.kind is FaultKind.NODE_FAIL:
                problems.append("master failure is not simulated")
        keys = [r.sme.key for r in self.streams]
        if len(keys) != len(set(keys)):
            problems.append("two streams share source and destination")
        for r in self.streams:
            if r.sme.src not in g or r.sme.dst not in g:
                problems.append(f"stream {r.sme.src}->{r.sme.dst} names unknown node")
        if problems:
            raise InvalidScenario("; ".join(problems))
