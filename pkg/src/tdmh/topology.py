"""Distributed topology collection.

Every node broadcasts, in its round-robin uplink slot, its id, its flood hop,
a forwardee (a random known neighbour with a lower hop) and a bitmask of its
direct neighbours, plus a FIFO batch of topologies it was asked to forward.
Overhearing neighbours learn links; the chosen forwardee queues the record so
that it moves one hop closer to the master each time it is retransmitted.

Time for freshness bookkeeping is the global uplink slot counter: a
neighbour not heard for ``topology_expiry_rounds`` full rounds
(``max_nodes - 1`` uplink slots each) is dropped.
"""

from __future__ import annotations

import random
import struct
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from tdmh.errors import Malformed, NotMyTurn, Oversize
from tdmh.graph import NetworkGraph, edge
from tdmh.netconfig import MASTER, MAX_FRAME_PAYLOAD, NetworkConfiguration
from tdmh.scheduler.streams import Action, StreamManagementElement

__all__ = [
    "ForwardedTopology", "TopologyMessage", "NodeTopologyState", "MasterGraphState",
    "NetworkGraph", "pack_bitmask", "unpack_bitmask", "encode", "decode",
    "forward_capacity", "message_size", "build_uplink_message", "process_overheard",
    "master_process", "expire_stale", "enqueue_forward",
]

HEADER = struct.Struct(">BBBB")
SME = struct.Struct(">BBIBBB")


@dataclass(frozen=True)
class ForwardedTopology:
    node_id: int
    neighbors: frozenset[int]


@dataclass(frozen=True)
class TopologyMessage:
    node_id: int
    hop: int
    forwardee: int
    neighbors: frozenset[int] = frozenset()
    forwarded: tuple[ForwardedTopology, ...] = ()
    smes: tuple[StreamManagementElement, ...] = ()


def pack_bitmask(ids: Iterable[int], max_nodes: int) -> bytes:
    """Bit ``i`` lives in byte ``i // 8`` at position ``i % 8`` (LSB first)."""
    buf = bytearray((max_nodes + 7) // 8)
    for i in ids:
        if not 0 <= i < max_nodes:
            raise ValueError(f"node {i} outside bitmask of {max_nodes} nodes")
        buf[i >> 3] |= 1 << (i & 7)
    return bytes(buf)


def unpack_bitmask(data: bytes, max_nodes: int) -> frozenset[int]:
    ids = []
    for byte_index, byte in enumerate(data):
        for bit in range(8):
            if byte >> bit & 1:
                ids.append(byte_index * 8 + bit)
    if ids and ids[-1] >= max_nodes:
        raise Malformed(f"bitmask names node {ids[-1]} beyond max_nodes={max_nodes}")
    return frozenset(ids)


def message_size(n_forwarded: int, n_smes: int, config: NetworkConfiguration) -> int:
    b = config.bitmask_bytes
    return HEADER.size + b + n_forwarded * (1 + b) + 1 + n_smes * SME.size


def payload_budget(config: NetworkConfiguration) -> int:
    return config.uplink_frames_per_slot * MAX_FRAME_PAYLOAD


def forward_capacity(config: NetworkConfiguration) -> int:
    """Forwarded topologies that fit one uplink message carrying no SMEs."""
    spare = payload_budget(config) - message_size(0, 0, config)
    return max(0, min(255, spare // (1 + config.bitmask_bytes)))


def encode(msg: TopologyMessage, config: NetworkConfiguration) -> bytes:
    n = config.max_nodes
    if len(msg.forwarded) > 255 or len(msg.smes) > 255:
        raise Oversize("record counts must fit one byte")
    if message_size(len(msg.forwarded), len(msg.smes), config) > payload_budget(config):
        raise Oversize(f"message from node {msg.node_id} exceeds {payload_budget(config)} bytes")
    for nid in (msg.node_id, msg.forwardee):
        if not 0 <= nid < n:
            raise ValueError(f"node id {nid} outside [0, {n})")
    if msg.node_id in msg.neighbors:
        raise ValueError("a node cannot list itself as neighbour")
    out = bytearray(HEADER.pack(msg.node_id, msg.hop, msg.forwardee, len(msg.forwarded)))
    out += pack_bitmask(msg.neighbors, n)
    for f in msg.forwarded:
        if not 0 <= f.node_id < n or f.node_id in f.neighbors:
            raise ValueError(f"bad forwarded topology for node {f.node_id}")
        out.append(f.node_id)
        out += pack_bitmask(f.neighbors, n)
    out.append(len(msg.smes))
    for s in msg.smes:
        out += SME.pack(s.src, s.dst, s.period_ms, s.spatial_redundancy,
                        s.temporal_redundancy, int(s.action))
    return bytes(out)


def decode(data: bytes, config: NetworkConfiguration) -> TopologyMessage:
    n = config.max_nodes
    b = config.bitmask_bytes
    pos = 0

    def take(size):
        nonlocal pos
        if pos + size > len(data):
            raise Malformed(f"truncated message ({len(data)} bytes)")
        chunk = data[pos:pos + size]
        pos += size
        return chunk

    node_id, hop, forwardee, n_fwd = HEADER.unpack(take(HEADER.size))
    if node_id >= n or forwardee >= n:
        raise Malformed("node id beyond max_nodes")
    neighbors = unpack_bitmask(take(b), n)
    if node_id in neighbors:
        raise Malformed("self bit set in neighbour bitmask")
    forwarded = []
    for _ in range(n_fwd):
        fid = take(1)[0]
        if fid >= n:
            raise Malformed("forwarded node id beyond max_nodes")
        nb = unpack_bitmask(take(b), n)
        if fid in nb:
            raise Malformed("self bit set in forwarded bitmask")
        forwarded.append(ForwardedTopology(fid, nb))
    smes = []
    for _ in range(take(1)[0]):
        src, dst, period, spatial, temporal, action = SME.unpack(take(SME.size))
        try:
            smes.append(StreamManagementElement(src, dst, period, spatial, temporal, Action(action)))
        except ValueError as exc:
            raise Malformed(f"bad stream management element: {exc}") from None
    if pos != len(data):
        raise Malformed(f"{len(data) - pos} trailing bytes")
    return TopologyMessage(node_id, hop, forwardee, neighbors, tuple(forwarded), tuple(smes))


@dataclass
class NodeTopologyState:
    """What one (non-master) node knows locally."""

    my_id: int
    my_hop: Optional[int] = None
    heard: dict[int, int] = field(default_factory=dict)
    neighbor_hop: dict[int, int] = field(default_factory=dict)
    reports: dict[int, frozenset[int]] = field(default_factory=dict)
    forward_queue: deque = field(default_factory=deque)
    pending_smes: deque = field(default_factory=deque)
    # A record for a node already waiting in the queue replaces the queued
    # one in place instead of being appended behind it.
    coalesce: bool = True
    # Forward a node's record only when it differs from the last one this node
    # queued for it, or when that one is older than ``refresh_slots``.
    forward_changes_only: bool = True
    refresh_slots: Optional[int] = None
    # Keep the drawn forwardee while it stays a valid choice, so successive
    # records of one node travel the same queues and cannot overtake each other.
    sticky_forwardee: bool = True
    forwardee: Optional[int] = None
    last_queued: dict[int, tuple[frozenset[int], int]] = field(default_factory=dict)

    @property
    def neighbors(self) -> frozenset[int]:
        return frozenset(self.heard)

    @property
    def local_graph(self) -> set[tuple[int, int]]:
        links = {edge(self.my_id, v) for v in self.heard}
        for v, nb in self.reports.items():
            links.update(edge(v, w) for w in nb if w != v)
        return links

    def on_flood(self, hop: int, now: int) -> None:
        """Record the hop learned from a master flood; hop 1 implies a master link."""
        self.my_hop = hop
        if hop == 1:
            self.heard[MASTER] = now
            self.neighbor_hop[MASTER] = 0


def build_uplink_message(state: NodeTopologyState, capacity: int,
                         rng: Optional[random.Random] = None,
                         config: Optional[NetworkConfiguration] = None,
                         slot_owner: Optional[int] = None) -> TopologyMessage:
    """Assemble this node's uplink message, draining its forward and SME queues.

    With ``config`` given, SMEs are attached only while the encoded message
    still fits the uplink payload budget.
    """
    if slot_owner is not None and slot_owner != state.my_id:
        raise NotMyTurn(f"slot belongs to node {slot_owner}, not {state.my_id}")
    if state.my_hop is None:
        raise NotMyTurn(f"node {state.my_id} has no hop yet")
    rng = rng or random.Random(0)
    lower = sorted(v for v in state.heard
                   if state.neighbor_hop.get(v, state.my_hop) < state.my_hop)
    if not state.sticky_forwardee or state.forwardee not in lower:
        state.forwardee = rng.choice(lower) if lower else None
    forwardee = state.my_id if state.forwardee is None else state.forwardee
    forwarded = []
    smes = []
    if state.forwardee is None:
        # nobody would take them yet: keep queued records and SMEs for later
        return TopologyMessage(state.my_id, state.my_hop, forwardee, state.neighbors, (), ())
    while state.forward_queue and len(forwarded) < capacity:
        forwarded.append(state.forward_queue.popleft())
    while state.pending_smes:
        if config is not None and (message_size(len(forwarded), len(smes) + 1, config)
                                   > payload_budget(config)):
            break
        smes.append(state.pending_smes.popleft())
    return TopologyMessage(state.my_id, state.my_hop, forwardee, state.neighbors,
                           tuple(forwarded), tuple(smes))


def process_overheard(state: NodeTopologyState, msg: TopologyMessage, now: int) -> NodeTopologyState:
    sender = msg.node_id
    if sender == state.my_id:
        return state
    state.heard[sender] = now
    state.neighbor_hop[sender] = msg.hop
    state.reports[sender] = msg.neighbors
    if msg.forwardee == state.my_id:
        enqueue_forward(state, ForwardedTopology(sender, msg.neighbors), now)
        for f in msg.forwarded:
            enqueue_forward(state, f, now)
        state.pending_smes.extend(msg.smes)
    return state


def enqueue_forward(state: NodeTopologyState, record: ForwardedTopology, now: int = 0) -> None:
    if state.forward_changes_only:
        last = state.last_queued.get(record.node_id)
        if (last is not None and last[0] == record.neighbors
                and (state.refresh_slots is None or now - last[1] < state.refresh_slots)):
            return
        state.last_queued[record.node_id] = (record.neighbors, now)
    queue = state.forward_queue
    if state.coalesce:
        for i, queued in enumerate(queue):
            if queued.node_id == record.node_id:
                queue[i] = record
                return
    queue.append(record)


@dataclass
class MasterGraphState:
    """The master's view of the network.

    Links touching the master come from what it overhears directly. Every
    other link is decided by the most recently applied bitmask of its two
    endpoints, so a fresh report that drops a neighbour overrides an older
    one that still lists it.
    """

    heard: dict[int, int] = field(default_factory=dict)
    adjacency: dict[int, frozenset[int]] = field(default_factory=dict)
    refreshed: dict[int, int] = field(default_factory=dict)
    smes: list = field(default_factory=list)
    seq: int = 0

    def apply(self, node: int, neighbors: frozenset[int]) -> None:
        self.seq += 1
        self.adjacency[node] = neighbors
        self.refreshed[node] = self.seq

    def edges(self) -> set[tuple[int, int]]:
        links = {edge(MASTER, v) for v in self.heard}
        for v, nb in self.adjacency.items():
            if v == MASTER:
                continue
            for w in nb:
                if w == MASTER or w == v:
                    continue
                if w not in self.adjacency or self.refreshed[w] < self.refreshed[v]:
                    links.add(edge(v, w))
        return links

    @property
    def graph(self) -> NetworkGraph:
        return NetworkGraph([MASTER], self.edges())


def master_process(state: MasterGraphState, msg: TopologyMessage, now: int) -> MasterGraphState:
    """Fold one overheard uplink message into the master's graph.

    Forwarded records are older than the sender's own bitmask, so they are
    applied first.
    """
    state.heard[msg.node_id] = now
    for f in msg.forwarded:
        state.apply(f.node_id, f.neighbors)
    state.apply(msg.node_id, msg.neighbors)
    if msg.forwardee == MASTER:
        state.smes.extend(msg.smes)
    return state


def expire_stale(state, now: int, expiry_slots: int):
    """Drop knowledge older than ``expiry_slots`` uplink slots.

    Works on both node and master state; the master only forgets its own
    direct links, remote links being overridden by newer reports instead.
    ``expiry_slots`` is normally ``topology_expiry_rounds * (max_nodes - 1)``.
    """
    if isinstance(state, MasterGraphState):
        for v in [v for v, t in state.heard.items() if now - t >= expiry_slots]:
            del state.heard[v]
        return state
    for v in [v for v, t in state.heard.items() if now - t >= expiry_slots]:
        del state.heard[v]
        state.neighbor_hop.pop(v, None)
        state.reports.pop(v, None)
    return state
