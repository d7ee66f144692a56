"""Master-initiated constructive-interference floods, abstracted as a lossy
breadth-first wave.

Concurrent transmitters of the same wave never collide: a node receives in
wave ``k`` when at least one of its hop ``k-1`` neighbours gets through, each
link being an independent Bernoulli trial with the link reliability.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from tdmh.graph import NetworkGraph

COUNTER_LIMIT = 2**32


@dataclass(frozen=True)
class SyncFrame:
    counter: int
    hop_counter: int = 0

    def __post_init__(self):
        if not 0 <= self.counter < COUNTER_LIMIT:
            raise ValueError("sync counter is a 32 bit unsigned value")


@dataclass(frozen=True)
class SchedulePacket:
    schedule_id: int
    activation_tile: int
    body: bytes = b""


@dataclass
class FloodOutcome:
    initiator: int
    hops: dict[int, int] = field(default_factory=dict)
    nodes: frozenset = frozenset()

    def received(self, node: int) -> bool:
        return node in self.hops and node != self.initiator

    def hop(self, node: int) -> Optional[int]:
        return self.hops.get(node)

    @property
    def receivers(self) -> set[int]:
        return set(self.hops) - {self.initiator}


def run_flood(graph: NetworkGraph, initiator: int, payload=None,
              rng: Optional[random.Random] = None,
              max_hops: Optional[int] = None) -> FloodOutcome:
    """Flood ``payload`` from ``initiator``; the payload itself is opaque here."""
    if initiator not in graph:
        raise ValueError(f"initiator {initiator} not in graph")
    rng = rng or random.Random(0)
    hops = {initiator: 0}
    wave = [initiator]
    k = 0
    while wave and (max_hops is None or k < max_hops):
        k += 1
        senders = set(wave)
        candidates = sorted({v for s in wave for v in graph.neighbors(s)} - hops.keys())
        wave = []
        for v in candidates:
            for s in graph.neighbors(v):
                if s in senders and rng.random() < graph.reliability(s, v):
                    wave.append(v)
                    break
        for v in wave:
            hops[v] = k
    return FloodOutcome(initiator, hops, frozenset(graph.nodes))


def global_time(counter: int, sync_period_ms: int) -> int:
    """Network time in ms carried implicitly by a sync counter value."""
    if not 0 <= counter < COUNTER_LIMIT:
        raise ValueError("sync counter is a 32 bit unsigned value")
    return counter * sync_period_ms


def disseminate_schedule(graph: NetworkGraph, packet: SchedulePacket, repetitions: int,
                         rng: Optional[random.Random] = None, initiator: int = 0,
                         max_hops: Optional[int] = None) -> dict[int, bool]:
    """Flood a schedule ``repetitions`` times; a node holds it if any flood reached it."""
    if repetitions < 1:
        raise ValueError("at least one repetition is required")
    rng = rng or random.Random(0)
    held = {n: n == initiator for n in graph.nodes}
    for _ in range(repetitions):
        outcome = run_flood(graph, initiator, packet, rng, max_hops)
        for n in outcome.hops:
            held[n] = True
    return held
