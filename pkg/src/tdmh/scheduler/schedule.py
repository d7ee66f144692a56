"""Transmissions, paths and the global schedule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from tdmh.netconfig import SlotGrid
from tdmh.scheduler.streams import Stream


@dataclass(frozen=True, order=True)
class Transmission:
    """Node ``sender`` transmits to ``receiver`` in data slot ``slot``.

    ``stream`` indexes ``Schedule.streams`` and ``path`` is the redundancy
    index within that stream; both are ``None`` for a transmission that
    belongs to no path.
    """

    slot: int
    sender: int
    receiver: int
    stream: Optional[int] = None
    path: Optional[int] = None

    def __post_init__(self):
        if self.sender == self.receiver:
            raise ValueError(f"node {self.sender} cannot transmit to itself")

    @property
    def link(self) -> tuple[int, int]:
        return (self.sender, self.receiver)


@dataclass
class Path:
    src: int
    dst: int
    period_ms: int
    index: int
    transmissions: list[Transmission] = field(default_factory=list)


@dataclass
class Schedule:
    schedule_id: int
    superframe_tiles: int
    activation_tile: int
    streams: list[Stream]
    transmissions: list[Transmission]
    grid: SlotGrid = field(compare=False, repr=False)
    rejected: list[Stream] = field(default_factory=list, compare=False)

    def period_tiles(self, stream_index: int) -> Optional[int]:
        """Stream period in whole tiles, or ``None`` when it is not a tile multiple."""
        p = self.streams[stream_index].period_ms
        q, r = divmod(p, self.grid.tile_duration_ms)
        return q if r == 0 and q > 0 else None

    def is_registered(self, tx: Transmission) -> bool:
        return (tx.stream is not None and tx.path is not None
                and 0 <= tx.stream < len(self.streams)
                and 0 <= tx.path < self.streams[tx.stream].spatial_redundancy)

    def paths(self) -> dict[tuple[int, int], Path]:
        out = {}
        for s, st in enumerate(self.streams):
            for z in range(st.spatial_redundancy):
                out[(s, z)] = Path(st.src, st.dst, st.period_ms, z)
        for tx in self.transmissions:
            if self.is_registered(tx):
                out[(tx.stream, tx.path)].transmissions.append(tx)
        return out

    def at_slot(self, slot: int) -> list[Transmission]:
        return [tx for tx in self.transmissions if tx.slot == slot]

    def instance_of(self, tx: Transmission) -> int:
        """Which period instance (window index) of its stream a transmission serves."""
        p = self.period_tiles(tx.stream)
        return self.grid.tile_of[tx.slot] // p

    def dump(self) -> str:
        from tdmh.scheduler.codec import format_schedule
        return format_schedule(self)
