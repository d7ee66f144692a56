"""Greedy earliest-slot stream placement.

Streams are taken in request order. Each path of a stream is laid out in the
first period window (tiles ``[0, P)``) hop by hop, every hop taking the
earliest slot after the previous one whose copies in all later windows are
free of node clashes and of sender/receiver cross-links. A stream whose paths
do not all fit is rejected and leaves no trace.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional, Sequence, Union

from tdmh.errors import Unreachable
from tdmh.graph import NetworkGraph
from tdmh.netconfig import NetworkConfiguration, SlotGrid, data_superframe_length
from tdmh.scheduler.routing import NodePath, route_paths
from tdmh.scheduler.schedule import Schedule, Transmission
from tdmh.scheduler.streams import Stream, StreamManagementElement, StreamState


class SlotOccupancy:
    """Per-slot record of placed transmissions, for conflict checks."""

    def __init__(self, graph: NetworkGraph, grid: SlotGrid):
        self.graph = graph
        self.grid = grid
        self.busy: list[set[int]] = [set() for _ in range(grid.n_slots)]
        self.links: list[list[tuple[int, int]]] = [[] for _ in range(grid.n_slots)]

    def fits(self, slot: int, sender: int, receiver: int) -> bool:
        busy = self.busy[slot]
        if sender in busy or receiver in busy:
            return False
        g = self.graph
        for k, l in self.links[slot]:
            if g.has_edge(sender, l) or g.has_edge(k, receiver):
                return False
        return True

    def add(self, slot: int, sender: int, receiver: int) -> None:
        self.busy[slot].update((sender, receiver))
        self.links[slot].append((sender, receiver))

    def remove(self, slot: int, sender: int, receiver: int) -> None:
        self.busy[slot].difference_update((sender, receiver))
        self.links[slot].remove((sender, receiver))


def replicas(grid: SlotGrid, slot: int, period_tiles: int) -> Optional[list[int]]:
    """The slot's copies in every period window, or ``None`` if one does not exist."""
    out = []
    for m in range(grid.n_tiles // period_tiles):
        t = grid.shift(slot, m * period_tiles)
        if t is None:
            return None
        out.append(t)
    return out


def hop_sequence(path: NodePath, temporal_redundancy: int) -> list[tuple[int, int]]:
    return [(a, b) for a, b in zip(path, path[1:]) for _ in range(temporal_redundancy)]


def place_chain(occ: SlotOccupancy, hops: Sequence[tuple[int, int]],
                period_tiles: int) -> Optional[list[int]]:
    """Earliest strictly increasing first-window slots for ``hops``, or ``None``."""
    window = occ.grid.slots_in_tiles(0, period_tiles)
    chosen = []
    t = window.start
    for sender, receiver in hops:
        while t < window.stop:
            copies = replicas(occ.grid, t, period_tiles)
            if copies is not None and all(occ.fits(c, sender, receiver) for c in copies):
                break
            t += 1
        else:
            return None
        chosen.append(t)
        t += 1
    return chosen


def _as_streams(streams: Iterable[Union[Stream, StreamManagementElement]]) -> list[Stream]:
    out = []
    for i, s in enumerate(streams):
        if isinstance(s, StreamManagementElement):
            out.append(Stream.from_sme(i, s))
        else:
            out.append(replace(s, state=StreamState.REQUESTED))
    return out


def schedule_streams(graph: NetworkGraph, streams, config: NetworkConfiguration,
                     schedule_id: int = 0, activation_tile: int = 0,
                     interference: Optional[NetworkGraph] = None) -> Schedule:
    """Route on ``graph``; conflicts are checked on ``interference`` (default: ``graph``),
    which may hold extra links too weak to route over but strong enough to collide."""
    requested = _as_streams(streams)
    admissible = [s for s in requested if s.period_ms in config.allowed_periods_ms]
    tiles = data_superframe_length(config, {s.period_ms for s in admissible})
    grid = SlotGrid.from_config(config, tiles)
    occ = SlotOccupancy(graph if interference is None else interference, grid)

    accepted: list[Stream] = []
    rejected: list[Stream] = []
    transmissions: list[Transmission] = []
    for stream in requested:
        placement = None
        if stream.period_ms in config.allowed_periods_ms:
            placement = _place_stream(graph, occ, stream, stream.period_ms // config.tile_duration_ms)
        if placement is None:
            rejected.append(replace(stream, state=StreamState.REJECTED))
            continue
        index = len(accepted)
        accepted.append(replace(stream, state=StreamState.SCHEDULED))
        for z, slot, sender, receiver in placement:
            transmissions.append(Transmission(slot, sender, receiver, index, z))

    transmissions.sort()
    return Schedule(schedule_id, tiles, activation_tile, accepted, transmissions, grid, rejected)


def _place_stream(graph, occ, stream, period_tiles):
    try:
        paths = route_paths(graph, stream)
    except Unreachable:
        return None
    placed = []
    for z, path in enumerate(paths):
        hops = hop_sequence(path, stream.temporal_redundancy)
        slots = place_chain(occ, hops, period_tiles)
        if slots is None:
            for _, slot, sender, receiver in placed:
                occ.remove(slot, sender, receiver)
            return None
        for slot, (sender, receiver) in zip(slots, hops):
            for copy in replicas(occ.grid, slot, period_tiles):
                occ.add(copy, sender, receiver)
                placed.append((z, copy, sender, receiver))
    return placed
