"""Stream requests and their scheduling state."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Action(enum.IntEnum):
    OPEN = 0
    CLOSE = 1


class StreamState(str, enum.Enum):
    REQUESTED = "REQUESTED"
    SCHEDULED = "SCHEDULED"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class StreamManagementElement:
    src: int
    dst: int
    period_ms: int
    spatial_redundancy: int = 1
    temporal_redundancy: int = 1
    action: Action = Action.OPEN

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("a stream needs distinct endpoints")
        if self.spatial_redundancy < 1 or self.temporal_redundancy < 1:
            raise ValueError("redundancy must be at least 1")
        object.__setattr__(self, "action", Action(self.action))

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass
class Stream:
    id: int
    src: int
    dst: int
    period_ms: int
    spatial_redundancy: int = 1
    temporal_redundancy: int = 1
    state: StreamState = StreamState.REQUESTED

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("a stream needs distinct endpoints")
        if self.spatial_redundancy < 1 or self.temporal_redundancy < 1:
            raise ValueError("redundancy must be at least 1")

    @classmethod
    def from_sme(cls, id: int, sme: StreamManagementElement) -> "Stream":
        return cls(id, sme.src, sme.dst, sme.period_ms,
                   sme.spatial_redundancy, sme.temporal_redundancy)

    def spec(self) -> tuple:
        return (self.src, self.dst, self.period_ms,
                self.spatial_redundancy, self.temporal_redundancy)
