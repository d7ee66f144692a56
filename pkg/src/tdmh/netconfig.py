"""Network configuration and the deterministic time/slot arithmetic built on it.

Everything here is a pure function of an immutable :class:`NetworkConfiguration`.
Durations are integral milliseconds throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from functools import reduce
from typing import Iterable, Optional, Sequence

#: Largest payload an IEEE 802.15.4 frame can carry, in bytes.
MAX_FRAME_PAYLOAD = 125

#: Node ids travel as a single byte in every binary format.
MAX_NODE_ID_SPACE = 256

# Downlink slot helper default: flood start-up plus one rebroadcast per hop.
FLOOD_BASE_MS = 2
FLOOD_REBROADCAST_MS = 2

PERIOD_SERIES = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)

MASTER = 0


class TileKind(str, enum.Enum):
    DOWNLINK = "DOWNLINK"
    UPLINK = "UPLINK"


def default_downlink_slot_ms(max_hops: int) -> int:
    return FLOOD_BASE_MS + max_hops * FLOOD_REBROADCAST_MS


@dataclass(frozen=True)
class NetworkConfiguration:
    """Parameters shared by every node of one network (plus the node's own id
    at association time, which the simulator tracks separately).

    ``downlink_slot_duration_ms`` and ``allowed_periods_ms`` may be left as
    ``None``; they are then derived from ``max_hops`` and the tile duration.
    """

    pan_id: int = 0x1234
    channel: int = 26
    sync_period_ms: int = 10_000
    propagation_delay_compensation: bool = False
    tile_duration_ms: int = 100
    control_superframe: tuple[TileKind, ...] = (TileKind.DOWNLINK, TileKind.UPLINK)
    data_slot_duration_ms: int = 6
    data_frame_size_bytes: int = 125
    downlink_slot_duration_ms: Optional[int] = None
    uplink_frames_per_slot: int = 1
    uplink_frame_duration_ms: int = 6
    max_hops: int = 6
    max_nodes: int = 32
    topology_expiry_rounds: int = 3
    schedule_repetitions: int = 2
    allowed_periods_ms: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        csf = tuple(TileKind(k) for k in self.control_superframe)
        object.__setattr__(self, "control_superframe", csf)
        if self.downlink_slot_duration_ms is None:
            object.__setattr__(
                self, "downlink_slot_duration_ms", default_downlink_slot_ms(self.max_hops)
            )
        if self.allowed_periods_ms is None:
            periods = tuple(m * self.tile_duration_ms for m in PERIOD_SERIES)
        else:
            periods = tuple(sorted(set(int(p) for p in self.allowed_periods_ms)))
        object.__setattr__(self, "allowed_periods_ms", periods)

    def replace(self, **changes) -> "NetworkConfiguration":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        # Derived fields follow their inputs unless overridden explicitly.
        if "max_hops" in changes and "downlink_slot_duration_ms" not in changes:
            values["downlink_slot_duration_ms"] = None
        if "tile_duration_ms" in changes and "allowed_periods_ms" not in changes:
            values["allowed_periods_ms"] = None
        values.update(changes)
        return NetworkConfiguration(**values)

    @property
    def effective_uplink_frames(self) -> int:
        """Frames per uplink slot, counting the propagation-delay reply."""
        return self.uplink_frames_per_slot + (1 if self.propagation_delay_compensation else 0)

    @property
    def uplink_slot_duration_ms(self) -> int:
        return self.effective_uplink_frames * self.uplink_frame_duration_ms

    @property
    def control_superframe_ms(self) -> int:
        return len(self.control_superframe) * self.tile_duration_ms

    @property
    def uplink_tiles_per_superframe(self) -> int:
        return sum(1 for k in self.control_superframe if k is TileKind.UPLINK)

    @property
    def round_slots(self) -> int:
        """Uplink slots in one full round-robin round (the master owns none)."""
        return self.max_nodes - 1

    @property
    def round_duration_ms(self) -> float:
        per_slot = self.control_superframe_ms / self.uplink_tiles_per_superframe
        return self.round_slots * per_slot

    @property
    def bitmask_bytes(self) -> int:
        return math.ceil(self.max_nodes / 8)

    def tile_kind(self, tile: int) -> TileKind:
        return self.control_superframe[tile % len(self.control_superframe)]

    def control_slot_ms(self, kind: TileKind) -> int:
        if kind is TileKind.DOWNLINK:
            return self.downlink_slot_duration_ms
        return self.uplink_slot_duration_ms


@dataclass(frozen=True)
class ConfigViolation:
    field: str
    rule: str

    def __str__(self):
        return f"{self.field}: {self.rule}"


def validate(config: NetworkConfiguration) -> list[ConfigViolation]:
    """Return every broken structural rule; an empty list means the config is usable."""
    out: list[ConfigViolation] = []

    def bad(name, rule):
        out.append(ConfigViolation(name, rule))

    csf = config.control_superframe
    if TileKind.DOWNLINK not in csf:
        bad("control_superframe", "missing DOWNLINK tile")
    if TileKind.UPLINK not in csf:
        bad("control_superframe", "missing UPLINK tile")

    if config.tile_duration_ms <= 0:
        bad("tile_duration_ms", "must be positive")
    if config.data_slot_duration_ms <= 0:
        bad("data_slot_duration_ms", "must be positive")
    if config.uplink_frame_duration_ms <= 0:
        bad("uplink_frame_duration_ms", "must be positive")
    if config.sync_period_ms <= 0:
        bad("sync_period_ms", "must be positive")
    if config.downlink_slot_duration_ms <= 0:
        bad("downlink_slot_duration_ms", "must be positive")
    elif config.downlink_slot_duration_ms >= config.tile_duration_ms:
        bad("downlink_slot_duration_ms", "control slot does not fit in tile")
    if config.uplink_frames_per_slot < 1:
        bad("uplink_frames_per_slot", "at least one frame required")
    elif config.uplink_slot_duration_ms >= config.tile_duration_ms:
        bad("uplink_frames_per_slot", "uplink slot does not fit in tile")

    if config.data_frame_size_bytes > MAX_FRAME_PAYLOAD:
        bad("data_frame_size_bytes", "frame exceeds physical maximum")
    elif config.data_frame_size_bytes < 1:
        bad("data_frame_size_bytes", "frame must carry at least one byte")

    if config.max_hops < 1:
        bad("max_hops", "at least one hop required")
    if config.max_nodes < 2:
        bad("max_nodes", "at least two nodes required")
    elif config.max_nodes > MAX_NODE_ID_SPACE:
        bad("max_nodes", "node ids must fit in one byte")
    if config.topology_expiry_rounds < 1:
        bad("topology_expiry_rounds", "must be at least one round")
    if config.schedule_repetitions < 1:
        bad("schedule_repetitions", "must be at least one repetition")

    if not config.allowed_periods_ms:
        bad("allowed_periods_ms", "no admissible period")
    for p in config.allowed_periods_ms:
        if p <= 0 or config.tile_duration_ms <= 0 or p % config.tile_duration_ms:
            bad("allowed_periods_ms", f"period {p} is not a positive multiple of the tile")
    return out


@dataclass(frozen=True)
class SlotLayout:
    kind: TileKind
    control_slot_ms: int
    data_slot_count: int
    slack_ms: int


def slot_layout(config: NetworkConfiguration, kind: TileKind) -> SlotLayout:
    kind = TileKind(kind)
    control = min(config.control_slot_ms(kind), config.tile_duration_ms)
    count, slack = divmod(config.tile_duration_ms - control, config.data_slot_duration_ms)
    return SlotLayout(kind, control, count, slack)


def uplink_node_for_slot(round_slot_index: int, max_nodes: int) -> int:
    """Owner of an uplink slot: counts down from ``max_nodes - 1`` to 1, then wraps."""
    if max_nodes < 2:
        raise ValueError("round robin needs at least one non-master node")
    return (max_nodes - 1) - (round_slot_index % (max_nodes - 1))


def control_overhead(config: NetworkConfiguration) -> float:
    """Fraction of data-slot capacity eaten by control slots over one control superframe."""
    data = 0
    capacity = 0
    for kind in config.control_superframe:
        data += slot_layout(config, kind).data_slot_count
        capacity += config.tile_duration_ms // config.data_slot_duration_ms
    if capacity == 0:
        return 1.0
    return 1.0 - data / capacity


def data_superframe_length(config: NetworkConfiguration, periods: Iterable[int]) -> int:
    """Data superframe length in tiles: lcm of the periods and the control superframe."""
    periods = set(periods)
    for p in periods:
        if p not in config.allowed_periods_ms:
            raise ValueError(f"period {p} ms is not admissible")
    total_ms = reduce(math.lcm, periods, config.control_superframe_ms)
    return total_ms // config.tile_duration_ms


class SlotGrid:
    """Data slots of one data superframe, numbered 0..n_slots-1 in time order.

    Each slot sits at an in-tile ``offset`` of some ``tile``. Periodic repetition
    maps a slot to the same offset a whole number of tiles later; that is how
    periods expressed in tiles become slot arithmetic even when downlink and
    uplink tiles hold different numbers of data slots.
    """

    def __init__(self, tile_duration_ms: int, data_slot_duration_ms: int,
                 control_ms: Sequence[int]):
        self.tile_duration_ms = tile_duration_ms
        self.data_slot_duration_ms = data_slot_duration_ms
        self.control_ms = tuple(control_ms)
        self.n_tiles = len(self.control_ms)
        self.tile_slots: list[int] = []
        self._first: list[int] = []
        self.tile_of: list[int] = []
        self.offset_of: list[int] = []
        self.start_ms: list[int] = []
        for k, ctrl in enumerate(self.control_ms):
            count = max(0, tile_duration_ms - ctrl) // data_slot_duration_ms
            self._first.append(len(self.tile_of))
            self.tile_slots.append(count)
            for s in range(count):
                self.tile_of.append(k)
                self.offset_of.append(s)
                self.start_ms.append(k * tile_duration_ms + ctrl + s * data_slot_duration_ms)

    @classmethod
    def from_config(cls, config: NetworkConfiguration, superframe_tiles: int) -> "SlotGrid":
        control = [slot_layout(config, config.tile_kind(k)).control_slot_ms
                   for k in range(superframe_tiles)]
        return cls(config.tile_duration_ms, config.data_slot_duration_ms, control)

    def __eq__(self, other):
        return (isinstance(other, SlotGrid)
                and (self.tile_duration_ms, self.data_slot_duration_ms, self.control_ms)
                == (other.tile_duration_ms, other.data_slot_duration_ms, other.control_ms))

    def __repr__(self):
        return (f"SlotGrid(tile={self.tile_duration_ms}ms, slot={self.data_slot_duration_ms}ms, "
                f"control={list(self.control_ms)})")

    @property
    def n_slots(self) -> int:
        return len(self.tile_of)

    @property
    def duration_ms(self) -> int:
        return self.n_tiles * self.tile_duration_ms

    def slot_at(self, tile: int, offset: int) -> Optional[int]:
        tile %= self.n_tiles
        if 0 <= offset < self.tile_slots[tile]:
            return self._first[tile] + offset
        return None

    def slots_in_tiles(self, first_tile: int, n_tiles: int) -> range:
        """Slot indices of the tiles ``[first_tile, first_tile + n_tiles)`` (no wrap)."""
        lo = self._first[first_tile]
        last = first_tile + n_tiles
        hi = self._first[last] if last < self.n_tiles else self.n_slots
        return range(lo, hi)

    def shift(self, slot: int, tiles: int) -> Optional[int]:
        return self.slot_at(self.tile_of[slot] + tiles, self.offset_of[slot])

    def end_ms(self, slot: int) -> int:
        return self.start_ms[slot] + self.data_slot_duration_ms
